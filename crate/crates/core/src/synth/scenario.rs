// SPDX-License-Identifier: MIT OR Apache-2.0

//! Line-oriented scenario files.
//!
//! ```text
//! # three regimes in five dimensions
//! dimension 5
//! seed 42
//! labels a b c d e          # optional
//! regime
//!   length 500
//!   mean zero               # or: mean 0.1 0 0 0 0
//!   cov identity 1.0        # or: cov diagonal v1 .. vM
//! end                       #     cov equicorrelated <variance> <rho>
//! regime                    #     M lines of: cov v1 .. vM
//!   length 500
//!   mean zero
//!   cov equicorrelated 1.0 0.8
//! end
//! ```
//!
//! Blank lines and `#` comments are ignored. `dimension` must precede the
//! first regime; `seed` defaults to 0.

use std::path::Path;

use super::{equicorrelated, MixtureScenario, RegimeSpec};
use crate::error::{CovsegError, Result};
use crate::kernels::Matrix;

/// Parsed scenario plus optional series labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub scenario: MixtureScenario,
    pub labels: Option<Vec<String>>,
}

#[derive(Default)]
struct RegimeDraft {
    start_line: usize,
    length: Option<usize>,
    mean: Option<Vec<f64>>,
    cov: Option<Matrix>,
    cov_rows: Vec<Vec<f64>>,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|source| CovsegError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn parse_scenario(text: &str, source: &str) -> Result<ScenarioFile> {
    let err = |line: usize, message: String| CovsegError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut dim: Option<usize> = None;
    let mut seed = 0u64;
    let mut labels: Option<(usize, Vec<String>)> = None;
    let mut regimes = Vec::new();
    let mut draft: Option<RegimeDraft> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let key = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();

        let numbers = |rest: &[&str]| -> Result<Vec<f64>> {
            rest.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(line_no, format!("expected a number, found '{t}'")))
                })
                .collect()
        };
        let one: Option<&str> = match rest.as_slice() {
            [v] => Some(*v),
            _ => None,
        };
        let single = || one.ok_or_else(|| err(line_no, format!("'{key}' takes exactly one value")));

        match (key, draft.as_mut()) {
            ("dimension", None) => {
                let v = single()?;
                let d: usize = v
                    .parse()
                    .ok()
                    .filter(|d| *d > 0)
                    .ok_or_else(|| err(line_no, format!("invalid dimension '{v}'")))?;
                if !regimes.is_empty() {
                    return Err(err(line_no, "dimension must precede all regimes".into()));
                }
                dim = Some(d);
            }
            ("seed", None) => {
                let v = single()?;
                seed = v
                    .parse()
                    .map_err(|_| err(line_no, format!("invalid seed '{v}'")))?;
            }
            ("labels", None) => {
                labels = Some((line_no, rest.iter().map(|s| s.to_string()).collect()))
            }
            ("regime", None) => {
                if dim.is_none() {
                    return Err(err(
                        line_no,
                        "'dimension' must be declared before 'regime'".into(),
                    ));
                }
                draft = Some(RegimeDraft {
                    start_line: line_no,
                    ..Default::default()
                });
            }
            ("regime", Some(_)) => {
                return Err(err(line_no, "nested 'regime' (missing 'end')".into()));
            }
            ("length", Some(d)) => {
                let v = single()?;
                d.length = Some(
                    v.parse()
                        .ok()
                        .filter(|n| *n > 0)
                        .ok_or_else(|| err(line_no, format!("invalid length '{v}'")))?,
                );
            }
            ("mean", Some(d)) => {
                let m = dim.unwrap_or(0);
                let mean = if rest == ["zero"] {
                    vec![0.0; m]
                } else {
                    numbers(&rest)?
                };
                if mean.len() != m {
                    return Err(err(
                        line_no,
                        format!("mean has {} entries, expected {m}", mean.len()),
                    ));
                }
                d.mean = Some(mean);
            }
            ("cov", Some(d)) => {
                let m = dim.unwrap_or(0);
                let shorthand = match rest.first().copied() {
                    Some("identity") => {
                        let s = numbers(&rest[1..])?;
                        match s.as_slice() {
                            [] => Some(Matrix::identity(m)),
                            [v] => Some(Matrix::identity(m).scale(*v)),
                            _ => {
                                return Err(err(
                                    line_no,
                                    "cov identity takes at most one scale".into(),
                                ))
                            }
                        }
                    }
                    Some("diagonal") => {
                        let v = numbers(&rest[1..])?;
                        if v.len() != m {
                            return Err(err(
                                line_no,
                                format!("diagonal has {} entries, expected {m}", v.len()),
                            ));
                        }
                        Some(Matrix::diagonal(&v))
                    }
                    Some("equicorrelated") => match numbers(&rest[1..])?.as_slice() {
                        [variance, rho] => Some(equicorrelated(m, *variance, *rho)),
                        _ => {
                            return Err(err(
                                line_no,
                                "cov equicorrelated takes <variance> <rho>".into(),
                            ))
                        }
                    },
                    _ => None,
                };
                match shorthand {
                    Some(c) => {
                        if d.cov.is_some() || !d.cov_rows.is_empty() {
                            return Err(err(line_no, "covariance given twice".into()));
                        }
                        d.cov = Some(c);
                    }
                    None => {
                        let row = numbers(&rest)?;
                        if row.len() != m {
                            return Err(err(
                                line_no,
                                format!("cov row has {} entries, expected {m}", row.len()),
                            ));
                        }
                        if d.cov.is_some() || d.cov_rows.len() == m {
                            return Err(err(line_no, "too many covariance rows".into()));
                        }
                        d.cov_rows.push(row);
                    }
                }
            }
            ("end", Some(_)) => {
                let d = draft.take().unwrap_or_default();
                let m = dim.unwrap_or(0);
                let at = d.start_line;
                let length = d
                    .length
                    .ok_or_else(|| err(at, "regime has no 'length'".into()))?;
                let mean = d
                    .mean
                    .ok_or_else(|| err(at, "regime has no 'mean'".into()))?;
                let cov = match d.cov {
                    Some(c) => c,
                    None if d.cov_rows.len() == m => Matrix::from_rows(&d.cov_rows)?,
                    None if d.cov_rows.is_empty() => {
                        return Err(err(at, "regime has no 'cov'".into()))
                    }
                    None => {
                        return Err(err(
                            line_no,
                            format!("expected {m} covariance rows, found {}", d.cov_rows.len()),
                        ))
                    }
                };
                regimes.push(RegimeSpec::new(length, mean, cov));
            }
            (k, Some(_)) if ["dimension", "seed", "labels"].contains(&k) => {
                return Err(err(
                    line_no,
                    format!("'{k}' is not allowed inside a regime"),
                ));
            }
            (k, None) if ["length", "mean", "cov", "end"].contains(&k) => {
                return Err(err(line_no, format!("'{k}' outside of a regime block")));
            }
            (k, _) => return Err(err(line_no, format!("unknown directive '{k}'"))),
        }
    }

    if let Some(d) = draft {
        return Err(err(
            d.start_line,
            "regime block is not closed with 'end'".into(),
        ));
    }
    if regimes.is_empty() {
        return Err(err(last_line.max(1), "scenario defines no regimes".into()));
    }
    if let (Some((at, l)), Some(m)) = (&labels, dim) {
        if l.len() != m {
            return Err(err(*at, format!("{} labels for dimension {m}", l.len())));
        }
    }
    Ok(ScenarioFile {
        scenario: MixtureScenario { regimes, seed },
        labels: labels.map(|(_, l)| l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "\
# acceptance-style scenario
dimension 3
seed 9
regime
  length 10
  mean zero
  cov identity
end
regime
  length 20
  mean 1 2 3
  cov equicorrelated 2.0 0.5
end
regime
  length 5
  mean zero
  cov 4 1 0
  cov 1 4 0
  cov 0 0 4   # trailing comment
end
";

    #[test]
    fn parses_all_covariance_forms() {
        let f = parse_scenario(THREE, "three.scn").unwrap();
        let s = &f.scenario;
        assert_eq!(s.seed, 9);
        assert_eq!(s.regimes.len(), 3);
        assert_eq!(s.regimes[1].mean, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.regimes[1].covariance[(0, 1)], 1.0);
        assert_eq!(s.regimes[1].covariance[(2, 2)], 2.0);
        assert_eq!(s.regimes[2].covariance.row(0), &[4.0, 1.0, 0.0]);
        assert_eq!(s.boundaries(), vec![10, 30]);
        assert!(f.labels.is_none());
    }

    #[test]
    fn zero_regimes_is_an_error() {
        let e = parse_scenario("dimension 2\nseed 1\n", "empty.scn").unwrap_err();
        assert!(matches!(e, CovsegError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("regime\nend\n", 1),
            ("dimension 2\nregime\nlength 4\nmean 0 x\n", 4),
            (
                "dimension 2\nregime\nlength 4\nmean zero\ncov 1 0\nend\n",
                6,
            ),
            (
                "dimension 2\nregime\nlength 4\nmean zero\ncov identity\n",
                2,
            ),
            ("dimension 2\nbogus 3\n", 2),
            ("dimension 2\nlength 3\n", 2),
        ];
        for (text, line) in cases {
            match parse_scenario(text, "bad.scn") {
                Err(CovsegError::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
