//! Line-oriented multimode state files.
//!
//! ```text
//! # comment
//! mode <ν> <r>          one line per mode, Γ_k = diag(νe^{2r}, νe^{-2r})
//! gauge                 optional; followed by 2N rows of 2N numbers
//! ```
//!
//! The state is `S(⊕Γ_k)Sᵀ` with `S` the gauge matrix (identity if absent).

use std::path::Path;

use crate::model::{CovarianceMatrix, SqueezedThermalParams};
use crate::symplectic::symplectic_residual;
use crate::tolerance::TOL_SYMP;
use crate::RMat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}{}: {message}", field.map(|f| format!(", field {f}")).unwrap_or_default())]
pub struct SpecError {
    pub line: usize,
    /// 1-based whitespace-separated field.
    pub field: Option<usize>,
    pub message: String,
}

fn err(line: usize, field: Option<usize>, message: impl Into<String>) -> SpecError {
    SpecError { line, field, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub modes: Vec<SqueezedThermalParams>,
    pub gauge: Option<RMat>,
}

fn number(tok: &str, line: usize, field: usize) -> Result<f64, SpecError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, Some(field), format!("expected a finite decimal number, got {tok:?}")))
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut modes = Vec::new();
        let mut gauge_rows: Option<Vec<Vec<f64>>> = None;
        let mut gauge_line = 0;
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if let Some(rows) = gauge_rows.as_mut() {
                let dim = 2 * modes.len();
                if rows.len() < dim {
                    if toks.len() != dim {
                        return Err(err(line, None, format!("gauge row has {} entries, expected {dim}", toks.len())));
                    }
                    rows.push(toks.iter().enumerate().map(|(j, t)| number(t, line, j + 1)).collect::<Result<_, _>>()?);
                    continue;
                }
                return Err(err(line, Some(1), format!("unexpected {:?} after the gauge block", toks[0])));
            }
            match toks[0] {
                "mode" => {
                    if toks.len() != 3 {
                        return Err(err(line, None, format!("`mode` takes ν and r, got {} fields", toks.len() - 1)));
                    }
                    let nu = number(toks[1], line, 2)?;
                    let r = number(toks[2], line, 3)?;
                    let p = SqueezedThermalParams::new(nu, r).map_err(|e| err(line, Some(2), e.to_string()))?;
                    modes.push(p);
                }
                "gauge" => {
                    if modes.is_empty() {
                        return Err(err(line, Some(1), "`gauge` must follow the mode lines"));
                    }
                    if toks.len() > 1 {
                        return Err(err(line, Some(2), "gauge rows go on the following lines"));
                    }
                    gauge_rows = Some(Vec::new());
                    gauge_line = line;
                }
                other => return Err(err(line, Some(1), format!("unknown keyword {other:?}"))),
            }
        }
        if modes.is_empty() {
            return Err(err(last_line.max(1), None, "no `mode` lines"));
        }
        let gauge = match gauge_rows {
            None => None,
            Some(rows) => {
                let dim = 2 * modes.len();
                if rows.len() != dim {
                    return Err(err(last_line, None, format!("gauge block has {} rows, expected {dim}", rows.len())));
                }
                let s = RMat::from_fn(dim, dim, |i, j| rows[i][j]);
                let res = symplectic_residual(&s);
                if !(res <= TOL_SYMP) {
                    return Err(err(gauge_line, None, format!("gauge is not symplectic (residual {res:.3e})")));
                }
                Some(s)
            }
        };
        Ok(Self { modes, gauge })
    }

    pub fn from_path(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(0, None, format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn covariance(&self) -> crate::Result<CovarianceMatrix> {
        let parts: Vec<CovarianceMatrix> = self.modes.iter().map(|p| p.covariance()).collect();
        let base = CovarianceMatrix::direct_sum(&parts)?;
        match &self.gauge {
            Some(s) => base.congruence(s),
            None => Ok(base),
        }
    }
}
