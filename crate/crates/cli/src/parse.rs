//! Parsers for the textual inputs: complex numbers, vectors, period matrices
//! and characteristics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use theta_eta::sampling::{random_tau, sample_rng};
use theta_eta::{Fixtures, SiegelMatrix, ThetaCharacteristic};

/// Name of the fixture that draws a fresh `tau` from the seed.
pub const RANDOM_FIXTURE: &str = "random-near-iI";

/// Accepts `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional whitespace.
pub fn complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse `{text}` as a complex number");
    if let Some(body) = s.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        let re = if re.is_empty() {
            0.0
        } else {
            re.parse::<f64>().map_err(|_| bad())?
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

/// Comma-separated complex numbers.
pub fn complex_list(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',').map(complex).collect()
}

/// A period matrix: a fixture name, `random-near-iI`, a JSON array of
/// `[re, im]` rows, rows of complex numbers separated by `;`, or a single
/// complex number (meaning that multiple of the identity).
/// A fixture of the requested size; names such as `i` that also read as a
/// scalar fall through when the sizes differ.
fn named(
    text: &str,
    n: Option<usize>,
    fixtures: &Fixtures,
) -> Result<Option<SiegelMatrix>, String> {
    if !fixtures.names().iter().any(|name| name == text) {
        return Ok(None);
    }
    let m = fixtures.get(text).map_err(|e| e.to_string())?;
    if n.is_some_and(|n| n != m.dim()) && complex(text).is_ok() {
        return Ok(None);
    }
    Ok(Some(m))
}

pub fn tau(
    text: &str,
    n: Option<usize>,
    seed: u64,
    fixtures: &Fixtures,
) -> Result<SiegelMatrix, String> {
    let text = text.trim();
    let matrix = if text == RANDOM_FIXTURE {
        let n = n.ok_or("`random-near-iI` needs --n")?;
        if n == 0 || n > theta_eta::MAX_DIMENSION {
            return Err(format!("n = {n} is outside 1..=6"));
        }
        return Ok(random_tau(&mut sample_rng(seed, u64::MAX), n));
    } else if let Some(m) = named(text, n, fixtures)? {
        m
    } else if text.starts_with('[') {
        let rows: Vec<Vec<[f64; 2]>> =
            serde_json::from_str(text).map_err(|e| format!("tau: {e}"))?;
        from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&[a, b]| Complex64::new(a, b)).collect())
                .collect(),
        )?
    } else if text.contains(';') || text.contains(',') {
        let rows = text
            .split(';')
            .map(complex_list)
            .collect::<Result<Vec<_>, _>>()?;
        from_rows(rows)?
    } else {
        let t = complex(text)?;
        let n = n.unwrap_or(1);
        let entries = DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { t } else { Complex64::new(0.0, 0.0) },
        );
        SiegelMatrix::new(entries).map_err(|e| e.to_string())?
    };
    match n {
        Some(n) if n != matrix.dim() => Err(format!(
            "--n {n} does not match the {}x{} matrix",
            matrix.dim(),
            matrix.dim()
        )),
        _ => Ok(matrix),
    }
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<SiegelMatrix, String> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!(
            "tau must be square; got {n} rows of lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    SiegelMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

/// `zero`, `odd:K`, `even:K` (index into the list ordered by `a`, then `b`),
/// or `a1,..,an:b1,..,bn` with entries 0 or 0.5.
pub fn characteristic(text: &str, n: usize) -> Result<ThetaCharacteristic, String> {
    let text = text.trim();
    let pick = |list: Vec<ThetaCharacteristic>, k: &str, kind: &str| {
        let k: usize = k.parse().map_err(|_| format!("bad index `{k}`"))?;
        let len = list.len();
        list.into_iter()
            .nth(k)
            .ok_or_else(|| format!("there are only {len} {kind} characteristics for n = {n}"))
    };
    if text == "zero" {
        Ok(ThetaCharacteristic::zero(n))
    } else if let Some(k) = text.strip_prefix("odd:") {
        pick(ThetaCharacteristic::odd(n), k, "odd")
    } else if let Some(k) = text.strip_prefix("even:") {
        pick(ThetaCharacteristic::even(n), k, "even")
    } else if let Some((a, b)) = text.split_once(':') {
        let parse = |s: &str| -> Result<Vec<f64>, String> {
            s.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad entry `{x}`"))
                })
                .collect()
        };
        let ch = ThetaCharacteristic::new(&parse(a)?, &parse(b)?).map_err(|e| e.to_string())?;
        if ch.dim() != n {
            return Err(format!(
                "characteristic has dimension {}, expected {n}",
                ch.dim()
            ));
        }
        Ok(ch)
    } else {
        Err(format!("cannot parse characteristic `{text}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::c64;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("i").unwrap(), c64(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), c64(0.0, -1.0));
        assert_eq!(complex("2i").unwrap(), c64(0.0, 2.0));
        assert_eq!(complex("0.5+2i").unwrap(), c64(0.5, 2.0));
        assert_eq!(complex("0.5 - 2i").unwrap(), c64(0.5, -2.0));
        assert_eq!(complex("1e-3+1e-2i").unwrap(), c64(1e-3, 1e-2));
        assert_eq!(complex("-3").unwrap(), c64(-3.0, 0.0));
        assert!(complex("x").is_err());
        assert!(complex("1+").is_err());
    }

    #[test]
    fn tau_forms() {
        let f = Fixtures::builtin();
        assert_eq!(tau("i", Some(2), 0, &f).unwrap().dim(), 2);
        assert_eq!(tau("iI2", None, 0, &f).unwrap().dim(), 2);
        assert!(tau("iI2", Some(3), 0, &f).is_err());
        let m = tau("i,0.1;0.1,1.2i", None, 0, &f).unwrap();
        assert_eq!(m.get(0, 1), c64(0.1, 0.0));
        let j = tau("[[[0,1],[0.1,0]],[[0.1,0],[0,1]]]", None, 0, &f).unwrap();
        assert_eq!(j.get(1, 0), c64(0.1, 0.0));
        assert!(tau("i,0.5;0.1,i", None, 0, &f)
            .unwrap_err()
            .contains("symmetric"));
        assert_eq!(
            tau(RANDOM_FIXTURE, Some(3), 5, &f).unwrap().entries(),
            tau(RANDOM_FIXTURE, Some(3), 5, &f).unwrap().entries()
        );
    }

    #[test]
    fn characteristic_forms() {
        assert!(characteristic("odd:0", 2).unwrap().is_odd());
        assert!(!characteristic("even:9", 2).unwrap().is_odd());
        assert!(characteristic("even:10", 2).is_err());
        assert!(characteristic("0.5,0:0.5,0", 2).unwrap().is_odd());
        assert!(characteristic("0.5:0.5", 2).is_err());
    }
}
