use std::io::Read;
use std::path::Path;

use crate::CliError;

/// Numbers from a file (`-` for stdin) or an inline string.
///
/// Without `column`, every whitespace-separated token is a value. With
/// `column = k`, each non-blank line is split on commas and field k
/// (1-based) is taken.
pub fn read_values(input: Option<&Path>, data: Option<&str>, column: Option<usize>) -> Result<Vec<f64>, CliError> {
    let text = match (input, data) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --input or --data, not both")),
        (None, None) => return Err(CliError::usage("estimate needs --input PATH (or -) or --data VALUES")),
        (None, Some(d)) => d.to_string(),
        (Some(p), None) if p == Path::new("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::usage(format!("reading stdin: {e}")))?;
            s
        }
        (Some(p), None) => std::fs::read_to_string(p)
            .map_err(|e| CliError::usage(format!("reading {}: {e}", p.display())))?,
    };
    parse_values(&text, column)
}

pub fn parse_values(text: &str, column: Option<usize>) -> Result<Vec<f64>, CliError> {
    let parse = |tok: &str, line: usize| {
        tok.trim()
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("line {line}: '{}' is not a number", tok.trim())))
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match column {
            None => {
                for tok in line.split_whitespace() {
                    out.push(parse(tok, i + 1)?);
                }
            }
            Some(0) => return Err(CliError::usage("--column is 1-based")),
            Some(k) => {
                let field = line
                    .split(',')
                    .nth(k - 1)
                    .ok_or_else(|| CliError::usage(format!("line {}: no column {k}", i + 1)))?;
                out.push(parse(field, i + 1)?);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("no data values found"));
    }
    Ok(out)
}

/// `lo:step:hi` or a single value.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("bad grid value '{s}' in '{spec}'")))
    };
    let (lo, step, hi) = match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            (v, 1.0, v)
        }
        [lo, step, hi] => (num(lo)?, num(step)?, num(hi)?),
        _ => return Err(CliError::usage(format!("grid must be lo:step:hi or a single value, got '{spec}'"))),
    };
    if !(lo > 0.0 && step > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::usage(format!("grid needs lo > 0 and step > 0, got '{spec}'")));
    }
    if hi < lo {
        return Err(CliError::usage(format!("grid '{spec}' is empty")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_columns() {
        assert_eq!(parse_values("1 2\n3\t4\n\n", None).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_values("a,1.5\nb,2.5\n", Some(2)).unwrap(), vec![1.5, 2.5]);
        assert!(parse_values("1 x", None).is_err());
        assert!(parse_values("   \n", None).is_err());
        assert!(parse_values("1,2", Some(3)).is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.05:0.05:10").unwrap();
        assert_eq!(g.len(), 200);
        assert!((g[199] - 10.0).abs() < 1e-12);
        assert_eq!(parse_grid("2.5").unwrap(), vec![2.5]);
        assert!(parse_grid("1:0.1:0.5").is_err());
        assert!(parse_grid("0:0.1:1").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
