//! Text forms for every value the command line reads or prints.
//!
//! Fields are `p`, `p^k`, or `p^k:c0,c1,...,ck` with an explicit modulus.
//! Elements of prime fields are integers in `[0, p)`; extension elements
//! are coefficient lists `[c0,c1,...]` in increasing degree.  Matrices
//! separate entries with `,` and rows with `;`.  Permutations print as
//! 1-indexed image lists and additionally parse from cycle notation.
//! Rationals print as `p/q` with the denominator always present and parse
//! from `p/q`, integers, or decimals with at most nine fractional digits.

use bimetric_core::field_core::{FieldElement, FieldSpec, Matrix};
use bimetric_core::perm_split::Permutation;
use bimetric_core::Rational;

/// Parse failure carrying a short description for diagnostics.
#[derive(Debug)]
pub struct ParseError(pub String);

impl ParseError {
    fn new(msg: impl Into<String>) -> ParseError {
        ParseError(msg.into())
    }
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseError::new("empty rational"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| ParseError::new("bad numerator"))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| ParseError::new("bad denominator"))?;
        if d == 0 {
            return Err(ParseError::new("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.len() > 9 {
            return Err(ParseError::new("more than nine fractional digits"));
        }
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(ParseError::new("bad decimal"));
        }
        let negative = whole.starts_with('-');
        let w: i64 = if whole == "-" || whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| ParseError::new("bad decimal"))?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| ParseError::new("bad decimal"))?
        };
        let magnitude = w.unsigned_abs() as i64 * scale + f;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(signed, scale));
    }
    let n: i64 = s.parse().map_err(|_| ParseError::new("bad integer"))?;
    Ok(Rational::new(n, 1))
}

pub fn parse_field(s: &str) -> Result<FieldSpec, ParseError> {
    let s = s.trim();
    let (base, modulus) = match s.split_once(':') {
        Some((b, m)) => (b, Some(m)),
        None => (s, None),
    };
    let (p, k) = match base.split_once('^') {
        Some((p, k)) => (
            p.parse::<u32>().map_err(|_| ParseError::new("bad characteristic"))?,
            k.parse::<u32>().map_err(|_| ParseError::new("bad degree"))?,
        ),
        None => (
            base.parse::<u32>().map_err(|_| ParseError::new("bad characteristic"))?,
            1,
        ),
    };
    match modulus {
        None => FieldSpec::new(p, k).map_err(|e| ParseError::new(e.code())),
        Some(m) => {
            let coeffs: Result<Vec<u32>, _> = m.split(',').map(|c| c.trim().parse::<u32>()).collect();
            let coeffs = coeffs.map_err(|_| ParseError::new("bad modulus coefficient"))?;
            FieldSpec::with_modulus(p, k, &coeffs).map_err(|e| ParseError::new(e.code()))
        }
    }
}

pub fn parse_element(f: &FieldSpec, s: &str) -> Result<FieldElement, ParseError> {
    let s = s.trim();
    if f.degree() == 1 {
        let v: u64 = s.parse().map_err(|_| ParseError::new("bad element"))?;
        if v >= f.characteristic() as u64 {
            return Err(ParseError::new("element out of range"));
        }
        return Ok(f.from_int(v));
    }
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| ParseError::new("extension element needs [c0,c1,...]"))?;
    let coeffs: Result<Vec<u32>, _> = inner.split(',').map(|c| c.trim().parse::<u32>()).collect();
    let coeffs = coeffs.map_err(|_| ParseError::new("bad coefficient"))?;
    if coeffs.len() != f.degree() as usize {
        return Err(ParseError::new("coefficient count must equal the degree"));
    }
    if coeffs.iter().any(|&c| c >= f.characteristic()) {
        return Err(ParseError::new("coefficient out of range"));
    }
    Ok(f.from_coeffs(&coeffs))
}

pub fn format_element(f: &FieldSpec, a: FieldElement) -> String {
    f.format_element(a)
}

pub fn parse_matrix(f: &FieldSpec, s: &str) -> Result<Matrix, ParseError> {
    let rows: Vec<&str> = s.trim().split(';').collect();
    let mut parsed: Vec<Vec<FieldElement>> = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut entries = Vec::new();
        // Extension entries contain commas inside brackets, so split at
        // bracket depth zero only.
        let mut depth = 0usize;
        let mut start = 0usize;
        let bytes = row.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'[' => depth += 1,
                b']' => {
                    if depth == 0 {
                        return Err(ParseError::new("unbalanced bracket"));
                    }
                    depth -= 1;
                }
                b',' if depth == 0 => {
                    entries.push(parse_element(f, &row[start..i])?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(ParseError::new("unbalanced bracket"));
        }
        entries.push(parse_element(f, &row[start..])?);
        parsed.push(entries);
    }
    let cols = parsed[0].len();
    if parsed.iter().any(|r| r.len() != cols) {
        return Err(ParseError::new("ragged matrix"));
    }
    Ok(Matrix::from_rows(f, cols, &parsed))
}

pub fn format_matrix(m: &Matrix) -> String {
    let f = m.field();
    let mut s = String::new();
    for i in 0..m.rows() {
        if i > 0 {
            s.push(';');
        }
        for j in 0..m.cols() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&f.format_element(m.get(i, j)));
        }
    }
    s
}

pub fn parse_permutation(n: usize, s: &str) -> Result<Permutation, ParseError> {
    let s = s.trim();
    if s.starts_with('(') {
        let mut cycles: Vec<Vec<u32>> = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let rest2 = rest
                .strip_prefix('(')
                .ok_or_else(|| ParseError::new("expected cycle open"))?;
            let close = rest2
                .find(')')
                .ok_or_else(|| ParseError::new("unclosed cycle"))?;
            let body = &rest2[..close];
            let points: Result<Vec<u32>, _> =
                body.split_whitespace().map(|p| p.parse::<u32>()).collect();
            let points = points.map_err(|_| ParseError::new("bad cycle point"))?;
            if points.is_empty() {
                return Err(ParseError::new("empty cycle"));
            }
            if points.iter().any(|&p| p == 0) {
                return Err(ParseError::new("points are 1-indexed"));
            }
            cycles.push(points.iter().map(|&p| p - 1).collect());
            rest = rest2[close + 1..].trim_start();
        }
        return Permutation::from_cycles(n, &cycles).map_err(|e| ParseError::new(e.code()));
    }
    let images: Result<Vec<u32>, _> = s.split_whitespace().map(|p| p.parse::<u32>()).collect();
    let images = images.map_err(|_| ParseError::new("bad image"))?;
    if images.len() != n {
        return Err(ParseError::new("image list length must equal n"));
    }
    if images.iter().any(|&v| v == 0) {
        return Err(ParseError::new("images are 1-indexed"));
    }
    let shifted: Vec<u32> = images.iter().map(|&v| v - 1).collect();
    Permutation::from_images(shifted).map_err(|e| ParseError::new(e.code()))
}

pub fn format_permutation(p: &Permutation) -> String {
    let mut s = String::new();
    for (i, &img) in p.images().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&(img + 1).to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("3").unwrap(), Rational::new(3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), Rational::new(-1, 2));
        assert_eq!(parse_rational("2/4").unwrap(), Rational::new(1, 2));
        assert!(parse_rational("0.1234567891").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&Rational::new(3, 2)), "3/2");
        assert_eq!(format_rational(&Rational::new(2, 1)), "2/1");
    }

    #[test]
    fn field_forms() {
        assert_eq!(parse_field("5").unwrap().order(), 5);
        assert_eq!(parse_field("2^2").unwrap().order(), 4);
        assert_eq!(parse_field("3^2:1,0,1").unwrap().order(), 9);
        assert!(parse_field("4").is_err());
        assert!(parse_field("x").is_err());
    }

    #[test]
    fn element_roundtrip() {
        let f5 = parse_field("5").unwrap();
        let a = parse_element(&f5, "3").unwrap();
        assert_eq!(format_element(&f5, a), "3");
        assert!(parse_element(&f5, "5").is_err());

        let f4 = parse_field("2^2").unwrap();
        let b = parse_element(&f4, "[1,1]").unwrap();
        assert_eq!(format_element(&f4, b), "[1,1]");
        assert!(parse_element(&f4, "3").is_err());
        assert!(parse_element(&f4, "[1]").is_err());
    }

    #[test]
    fn matrix_roundtrip() {
        let f3 = parse_field("3").unwrap();
        let m = parse_matrix(&f3, "1,2;0,1").unwrap();
        assert_eq!(format_matrix(&m), "1,2;0,1");
        assert!(parse_matrix(&f3, "1,2;0").is_err());

        let f4 = parse_field("2^2").unwrap();
        let m4 = parse_matrix(&f4, "[1,0],[0,1];[0,0],[1,1]").unwrap();
        assert_eq!(format_matrix(&m4), "[1,0],[0,1];[0,0],[1,1]");
    }

    #[test]
    fn permutation_forms() {
        let p = parse_permutation(5, "2 3 1 5 4").unwrap();
        assert_eq!(format_permutation(&p), "2 3 1 5 4");
        let q = parse_permutation(5, "(1 2 3)(4 5)").unwrap();
        assert_eq!(p, q);
        assert!(parse_permutation(4, "1 2 3").is_err());
        assert!(parse_permutation(4, "(1 2").is_err());
    }
}
