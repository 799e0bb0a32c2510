use std::io::Write;

use super::{Image, MeshIoError};

/// 8-bit RGB, non-interlaced, fixed zlib level and filter so equal images
/// give equal bytes.
pub fn write_png<W: Write>(image: &Image, destination: W) -> Result<(), MeshIoError> {
    image.validate()?;
    let width = u32::try_from(image.width).map_err(|_| MeshIoError::InvalidImage("width".into()))?;
    let height =
        u32::try_from(image.height).map_err(|_| MeshIoError::InvalidImage("height".into()))?;
    let mut encoder = ::png::Encoder::new(destination, width, height);
    encoder.set_color(::png::ColorType::Rgb);
    encoder.set_depth(::png::BitDepth::Eight);
    encoder.set_deflate_compression(::png::DeflateCompression::Level(6));
    encoder.set_filter(::png::Filter::Paeth);
    let png_err = |e: ::png::EncodingError| match e {
        ::png::EncodingError::IoError(io) => MeshIoError::Io(io),
        other => MeshIoError::Png(other.to_string()),
    };
    let mut writer = encoder.write_header().map_err(png_err)?;
    let data: Vec<u8> = image.pixels.iter().flatten().copied().collect();
    writer.write_image_data(&data).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(bytes: &[u8]) -> (u32, u32, Vec<u8>, ::png::ColorType, ::png::BitDepth) {
        let decoder = ::png::Decoder::new(std::io::Cursor::new(bytes));
        let mut reader = decoder.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        buf.truncate(info.buffer_size());
        (info.width, info.height, buf, info.color_type, info.bit_depth)
    }

    #[test]
    fn red_pixel_round_trip() {
        let mut out = Vec::new();
        write_png(&Image::new(1, 1, vec![[255, 0, 0]]), &mut out).unwrap();
        assert_eq!(&out[..8], b"\x89PNG\r\n\x1a\n");
        let (w, h, data, color, depth) = decode(&out);
        assert_eq!((w, h), (1, 1));
        assert_eq!(data, vec![255, 0, 0]);
        assert_eq!(color, ::png::ColorType::Rgb);
        assert_eq!(depth, ::png::BitDepth::Eight);
    }

    #[test]
    fn deterministic_and_lossless() {
        let pixels: Vec<[u8; 3]> = (0..35u8).map(|k| [k * 7, 255 - k, k ^ 0x5a]).collect();
        let img = Image::new(7, 5, pixels);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_png(&img, &mut a).unwrap();
        write_png(&img, &mut b).unwrap();
        assert_eq!(a, b);
        let (_, _, data, _, _) = decode(&a);
        assert_eq!(data, img.pixels.concat());
    }

    #[test]
    fn empty_image_is_rejected() {
        let img = Image {
            width: 0,
            height: 0,
            pixels: vec![],
        };
        assert!(write_png(&img, Vec::new()).is_err());
    }
}
