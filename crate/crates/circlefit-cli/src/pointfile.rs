//! Point file parsing: one `x,y` pair per line, `#` comments, and an
//! optional literal `x,y` header.

use circlefit::{Point, PointSet};

use crate::CliError;

pub fn parse(text: &str) -> Result<PointSet, CliError> {
    let mut points = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_data && line.replace(' ', "").eq_ignore_ascii_case("x,y") {
            continue;
        }
        let lineno = idx + 1;
        let (xs, ys) = line.split_once(',').ok_or_else(|| {
            CliError::usage(format!("line {lineno}: expected 'x,y', got '{line}'"))
        })?;
        let x: f64 = xs
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("line {lineno}: invalid x value '{}'", xs.trim())))?;
        let y: f64 = ys
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("line {lineno}: invalid y value '{}'", ys.trim())))?;
        seen_data = true;
        points.push(Point::new(x, y));
    }
    Ok(PointSet::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_header_and_comments() {
        let ps = parse("# three points\nx,y\n1,0\n0, 1\n-1,0\n").unwrap();
        assert_eq!(ps.len(), 3);
        assert_eq!(ps.points()[1].y, 1.0);
    }

    #[test]
    fn reports_line_number() {
        let err = parse("1,0\n0,1\nbogus\n").unwrap_err();
        assert_eq!(err.code, 1);
        assert!(err.message.contains("line 3"), "{}", err.message);
    }

    #[test]
    fn rejects_non_finite() {
        // "nan" parses as f64 but PointSet validation rejects it
        let err = parse("1,0\nnan,0\n0,1\n").unwrap_err();
        assert_eq!(err.code, 1);
    }
}
