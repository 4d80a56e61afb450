use crate::error::{Error, Result};

/// Parses a length with a unit suffix (`nm`, `um`/`µm`, `mm`, `cm`, `m`) into meters.
///
/// The number is divided by an exact power of ten, so `400um` is the double nearest
/// to 4e-4.
pub fn parse_length(field: &str, text: &str) -> Result<f64> {
    let text = text.trim();
    let (number, divisor) = [
        ("nm", 1e9),
        ("um", 1e6),
        ("µm", 1e6),
        ("mm", 1e3),
        ("cm", 1e2),
        ("m", 1.0),
    ]
    .iter()
    .find_map(|(suffix, div)| text.strip_suffix(suffix).map(|n| (n.trim(), *div)))
    .ok_or_else(|| {
        Error::config(
            field,
            format!("`{text}` needs a unit suffix (nm, um, mm, cm or m)"),
        )
    })?;
    let value: f64 = number
        .parse()
        .map_err(|_| Error::config(field, format!("`{number}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::config(field, "must be finite"));
    }
    Ok(value / divisor)
}

/// Formats meters so that [`parse_length`] reads back the identical double.
///
/// Picks nm, um or mm for lengths below 10 cm when that representation round-trips,
/// and plain meters otherwise.
pub fn format_length(meters: f64) -> String {
    let magnitude = meters.abs();
    let unit = [("nm", 1e9, 1e3), ("um", 1e6, 1e3), ("mm", 1e3, 1e2)]
        .into_iter()
        .find(|(_, scale, top)| (1.0..*top).contains(&(magnitude * scale)));
    if let Some((suffix, scale, _)) = unit {
        let text = format!("{}{suffix}", meters * scale);
        if parse_length("", &text).is_ok_and(|v| v == meters) {
            return text;
        }
    }
    format!("{meters}m")
}
