//! Numeric tokens with SI scale suffixes (`1k`, `2.5u`, `3MEG`, `10uF`).
//!
//! Values are assembled as a decimal string and converted once, so a token
//! written by [`format_value`] parses back to the identical `f64`.

use alloc::format;
use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueError {
    /// Character offset inside the token where parsing failed.
    pub position: usize,
    pub kind: ValueErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueErrorKind {
    Empty,
    MalformedMantissa,
    UnknownSuffix,
}

impl fmt::Display for ValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ValueErrorKind::Empty => "empty value",
            ValueErrorKind::MalformedMantissa => "malformed number",
            ValueErrorKind::UnknownSuffix => "unknown scale suffix",
        };
        write!(f, "{what} at position {}", self.position)
    }
}

impl core::error::Error for ValueError {}

const SUFFIXES: [(&str, i32); 9] = [
    ("meg", 6),
    ("f", -15),
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("m", -3),
    ("k", 3),
    ("g", 9),
    ("", 0),
];

fn suffix_for(exp3: i32) -> Option<&'static str> {
    SUFFIXES.iter().find(|(_, e)| *e == exp3).map(|(s, _)| *s)
}

/// Parse a decimal number with an optional, case-insensitive SI suffix.
/// Alphabetic characters after a recognised suffix are treated as a unit and
/// ignored.
pub fn parse_value(token: &str) -> Result<f64, ValueError> {
    let bytes = token.as_bytes();
    if bytes.is_empty() {
        return Err(ValueError {
            position: 0,
            kind: ValueErrorKind::Empty,
        });
    }
    let malformed = |position| ValueError {
        position,
        kind: ValueErrorKind::MalformedMantissa,
    };

    let mut i = 0;
    if matches!(bytes[0], b'+' | b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut n_digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        n_digits += i - frac_start;
    }
    if n_digits == 0 {
        return Err(malformed(i));
    }
    let mantissa_end = i;

    // No suffix starts with 'e', so an 'e' here must open an exponent.
    let mut exp: i32 = 0;
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        let mut j = i + 1;
        if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
            j += 1;
        }
        let digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == digits_start {
            return Err(malformed(i));
        }
        exp = token[i + 1..j].parse().map_err(|_| malformed(i))?;
        i = j;
    }

    let rest = &token[i..];
    let lower = rest.to_ascii_lowercase();
    let (suffix_len, scale) = SUFFIXES
        .iter()
        .find(|(s, _)| !s.is_empty() && lower.starts_with(s))
        .map(|(s, e)| (s.len(), *e))
        .unwrap_or((0, 0));
    let unit = &rest[suffix_len..];
    if (suffix_len == 0 && !unit.is_empty()) || !unit.bytes().all(|b| b.is_ascii_alphabetic()) {
        let bad = unit
            .bytes()
            .position(|b| !b.is_ascii_alphabetic())
            .unwrap_or(0);
        return Err(ValueError {
            position: i + suffix_len + bad,
            kind: ValueErrorKind::UnknownSuffix,
        });
    }

    let text = format!("{}e{}", &token[..mantissa_end], exp + scale);
    text.parse::<f64>().map_err(|_| malformed(0))
}

/// Shortest-exact decimal rendering with an automatically chosen suffix.
pub fn format_value(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let (_, exp) = decimal_parts(x);
    let exp3 = exp.div_euclid(3) * 3;
    if (-15..=9).contains(&exp3) {
        format_with_exponent(x, exp3)
    } else {
        format!("{x:e}")
    }
}

/// Render `x` scaled to a fixed power of ten that has an SI suffix, e.g.
/// `format_with_exponent(1.8e-7, -6) == "0.18u"`.
///
/// # Panics
///
/// If `exp3` has no suffix.
pub fn format_with_exponent(x: f64, exp3: i32) -> String {
    let suffix = suffix_for(exp3).expect("exponent without SI suffix");
    if x == 0.0 {
        return format!("0{suffix}");
    }
    let (digits, exp) = decimal_parts(x);
    let sign = if x < 0.0 { "-" } else { "" };
    // digits d0 d1 d2 ... represent d0.d1d2... * 10^exp
    let point = exp - exp3 + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}{suffix}")
}

// Significant digits (no point, no sign) and decimal exponent of the leading digit.
fn decimal_parts(x: f64) -> (String, i32) {
    let s = format!("{:e}", x.abs());
    let (mant, exp) = s.split_once('e').expect("{:e} always has an exponent");
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    (digits, exp.parse().expect("integer exponent"))
}
