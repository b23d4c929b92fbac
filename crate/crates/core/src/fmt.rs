/// Float text with 17 significant digits, enough for a lossless round trip.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}
