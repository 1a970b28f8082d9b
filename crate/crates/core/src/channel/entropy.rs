use super::ChannelError;

/// `H_b(p) = -p log2 p - (1-p) log2 (1-p)`, with `0 log2 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::Domain(p));
    }
    Ok(h2(p))
}

/// Unchecked form for callers that already validated `p`.
pub(crate) fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}
