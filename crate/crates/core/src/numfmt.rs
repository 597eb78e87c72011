//! Text formatting of reals for the on-disk formats.
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, then padded with trailing zeros up to a minimum number of
//! significant digits. Padding never changes the parsed value, so text round
//! trips are exact and `save(load(f))` reproduces canonical files byte for
//! byte.

/// Formats `x` exactly, with at least `min_sig` significant digits.
pub fn format_real(x: f64, min_sig: usize) -> String {
    debug_assert!(x.is_finite());
    let mut s = format!("{x}");
    let sig = significant_digits(&s);
    if sig < min_sig {
        if !s.contains('.') {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', min_sig - sig));
    }
    s
}

fn significant_digits(s: &str) -> usize {
    let digits: String = s.chars().filter(char::is_ascii_digit).collect();
    let trimmed = digits.trim_start_matches('0');
    if trimmed.is_empty() {
        // zero: count the digits after the decimal point
        s.split_once('.').map_or(0, |(_, frac)| frac.len())
    } else {
        trimmed.len()
    }
}
