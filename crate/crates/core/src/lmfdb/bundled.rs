//! Coefficient data shipped with the crate, usable with no network access.

use super::{CoefficientEntry, CoefficientFile, FormLabel, LmfdbError, Source};
use crate::qexpansion::delta_coefficients;

/// Labels that [`bundled`] can serve.
pub const BUNDLED_LABELS: [&str; 3] = ["1.12.a.a", "5.4.a.a", "56.1.h.a"];

// 5.4.a.a = η(z)⁴η(5z)⁴; 56.1.h.a is the weight-one theta series
// (θ_{x²+14y²} − θ_{2x²+7y²})/2. Both hold a(1)..a(1000).
const FORM_5_4_A_A: &str = include_str!("../../data/5.4.a.a.txt");
const FORM_56_1_H_A: &str = include_str!("../../data/56.1.h.a.txt");

/// Bundled coefficients for `label`, or `None` if the label is not bundled.
///
/// Δ (`1.12.a.a`) is generated on the spot with exactly `min_coeffs`
/// coefficients; the stored fixtures are returned whole.
pub fn bundled(label: &FormLabel, min_coeffs: usize) -> Option<Result<CoefficientFile, LmfdbError>> {
    let text = match label.to_string().as_str() {
        "1.12.a.a" => return Some(delta_file(label.clone(), min_coeffs.max(1))),
        "5.4.a.a" => FORM_5_4_A_A,
        "56.1.h.a" => FORM_56_1_H_A,
        _ => return None,
    };
    Some(CoefficientFile::from_text(text, Source::Bundled))
}

fn delta_file(label: FormLabel, count: usize) -> Result<CoefficientFile, LmfdbError> {
    let entries = delta_coefficients(count)
        .into_iter()
        .enumerate()
        .map(|(i, tau)| CoefficientEntry {
            n: i + 1,
            re: tau.to_string(),
            im: "0".to_string(),
        })
        .collect();
    CoefficientFile::new(label, entries, Source::Bundled)
}
