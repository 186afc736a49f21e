//! Serializable reports and their CSV rendering.

use antihankel::bench::PhaseTimings;
use antihankel::{
    build_hankel, compute_spectrum, hankel_apply, pole_multiset, verify_decompositions, weyl_brackets,
    EigenDecomposition, HankelParams, SolveDiagnostics, SpectralResult, SpectrumComparison,
};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float written with 17 significant digits. Non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed(pub f64);

impl Fixed {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            String::new()
        }
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

fn opt_text(x: Option<Fixed>) -> String {
    x.map(Fixed::text).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow {
    pub value: Fixed,
    pub kind: &'static str,
    pub residual: Option<Fixed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Fixed>>,
}

impl EigenRow {
    fn csv(&self) -> Vec<String> {
        vec![self.value.text(), self.kind.to_string(), opt_text(self.residual)]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub refinement_level: usize,
    pub samples_per_interval: usize,
    pub count_fallbacks: usize,
    pub complete: bool,
    pub secular_zeros: usize,
    pub pole_values: usize,
    pub brackets_ok: bool,
    pub max_residual: Option<Fixed>,
    pub vector_fallbacks: usize,
}

impl From<&SolveDiagnostics> for Diagnostics {
    fn from(d: &SolveDiagnostics) -> Self {
        Diagnostics {
            refinement_level: d.refinement_level,
            samples_per_interval: d.samples_per_interval,
            count_fallbacks: d.count_fallbacks,
            complete: d.complete,
            secular_zeros: d.secular_zeros,
            pole_values: d.pole_values,
            brackets_ok: d.brackets_ok,
            max_residual: d.max_residual.map(Fixed),
            vector_fallbacks: d.vector_fallbacks,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub n: usize,
    pub a: Fixed,
    pub b: Fixed,
    pub c: Fixed,
    pub eigenvalues: Vec<EigenRow>,
    pub diagnostics: Diagnostics,
}

fn solver_rows(result: &SpectralResult) -> Vec<EigenRow> {
    result
        .pairs
        .iter()
        .map(|p| EigenRow {
            value: Fixed(p.value),
            kind: p.kind.as_str(),
            residual: p.residual.map(Fixed),
            vector: p.vector.as_ref().map(|v| v.iter().copied().map(Fixed).collect()),
        })
        .collect()
}

impl SolveReport {
    pub fn new(result: &SpectralResult) -> Self {
        let p = &result.params;
        SolveReport {
            n: p.n(),
            a: Fixed(p.a()),
            b: Fixed(p.b()),
            c: Fixed(p.c()),
            eigenvalues: solver_rows(result),
            diagnostics: Diagnostics::from(&result.diagnostics),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDiagnostics {
    pub sweeps: usize,
    pub max_residual: Option<Fixed>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub a: Fixed,
    pub b: Fixed,
    pub c: Fixed,
    pub eigenvalues: Vec<EigenRow>,
    pub diagnostics: OracleDiagnostics,
}

impl OracleReport {
    pub fn new(params: &HankelParams, dense: &EigenDecomposition, want_vectors: bool) -> Self {
        let rows: Vec<EigenRow> = dense
            .values
            .iter()
            .enumerate()
            .map(|(k, &value)| {
                let v = dense.vectors.column(k);
                let hv = hankel_apply(params, &v);
                let r = hv.iter().zip(&v).map(|(h, x)| (h - value * x).powi(2)).sum::<f64>().sqrt();
                EigenRow {
                    value: Fixed(value),
                    kind: "ORACLE",
                    residual: Some(Fixed(r)),
                    vector: want_vectors.then(|| v.into_iter().map(Fixed).collect()),
                }
            })
            .collect();
        let max_residual = rows.iter().filter_map(|r| r.residual).map(|r| r.0).reduce(f64::max).map(Fixed);
        OracleReport {
            n: params.n(),
            a: Fixed(params.a()),
            b: Fixed(params.b()),
            c: Fixed(params.c()),
            eigenvalues: rows,
            diagnostics: OracleDiagnostics { sweeps: dense.sweeps, max_residual },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub max_abs_diff: Fixed,
    /// 1-based.
    pub worst_index: usize,
    pub tol_compare: Fixed,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub a: Fixed,
    pub b: Fixed,
    pub c: Fixed,
    pub eigenvalues: Vec<EigenRow>,
    pub oracle: Vec<Fixed>,
    pub comparison: Comparison,
    pub diagnostics: Diagnostics,
}

impl CompareReport {
    pub fn new(result: &SpectralResult, oracle: &[f64], cmp: &SpectrumComparison, tol_compare: f64) -> Self {
        let p = &result.params;
        CompareReport {
            n: p.n(),
            a: Fixed(p.a()),
            b: Fixed(p.b()),
            c: Fixed(p.c()),
            eigenvalues: solver_rows(result),
            oracle: oracle.iter().copied().map(Fixed).collect(),
            comparison: Comparison {
                max_abs_diff: Fixed(cmp.max_abs_diff),
                worst_index: cmp.worst_index,
                tol_compare: Fixed(tol_compare),
                pass: cmp.max_abs_diff <= tol_compare,
            },
            diagnostics: Diagnostics::from(&result.diagnostics),
        }
    }

    pub fn pass(&self) -> bool {
        self.comparison.pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub anticirculant: Fixed,
    pub hankel: Fixed,
    pub orthogonality: Fixed,
    pub xy_inner: Fixed,
    pub x_norm_error: Fixed,
    pub y_norm_error: Fixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketAudit {
    /// 1-based position in the sorted oracle spectrum.
    pub index: usize,
    pub value: Fixed,
    pub lo: Fixed,
    pub hi: Fixed,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub a: Fixed,
    pub b: Fixed,
    pub c: Fixed,
    pub residuals: Residuals,
    pub brackets: Vec<BracketAudit>,
    pub brackets_ok: bool,
}

impl VerifyReport {
    /// Decomposition residuals plus the position of every oracle eigenvalue
    /// relative to its bracket.
    pub fn new(params: &HankelParams, oracle: &[f64]) -> Self {
        let r = verify_decompositions(params);
        let poles = pole_multiset(params, &compute_spectrum(params));
        let slack = 1e-10 * params.scale();
        let brackets: Vec<BracketAudit> = weyl_brackets(params, &poles)
            .iter()
            .zip(oracle)
            .enumerate()
            .map(|(k, (br, &value))| BracketAudit {
                index: k + 1,
                value: Fixed(value),
                lo: Fixed(br.lo),
                hi: Fixed(br.hi),
                inside: br.contains(value, slack),
            })
            .collect();
        VerifyReport {
            n: params.n(),
            a: Fixed(params.a()),
            b: Fixed(params.b()),
            c: Fixed(params.c()),
            residuals: Residuals {
                anticirculant: Fixed(r.anticirculant),
                hankel: Fixed(r.hankel),
                orthogonality: Fixed(r.orthogonality),
                xy_inner: Fixed(r.xy_inner),
                x_norm_error: Fixed(r.x_norm_error),
                y_norm_error: Fixed(r.y_norm_error),
            },
            brackets_ok: brackets.iter().all(|b| b.inside),
            brackets,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub spectrum_s: Fixed,
    pub roots_s: Fixed,
    pub eigenvalues_only_s: Fixed,
    pub vectors_s: Option<Fixed>,
    pub oracle_s: Option<Fixed>,
    pub max_abs_diff: Option<Fixed>,
    pub max_residual: Option<Fixed>,
}

impl From<&PhaseTimings> for BenchRow {
    fn from(t: &PhaseTimings) -> Self {
        BenchRow {
            size: t.size,
            spectrum_s: Fixed(t.spectrum.as_secs_f64()),
            roots_s: Fixed(t.roots.as_secs_f64()),
            eigenvalues_only_s: Fixed(t.eigenvalues_only().as_secs_f64()),
            vectors_s: t.vectors.map(|d| Fixed(d.as_secs_f64())),
            oracle_s: t.oracle.map(|d| Fixed(d.as_secs_f64())),
            max_abs_diff: t.max_abs_diff.map(Fixed),
            max_residual: t.max_residual.map(Fixed),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub a: Fixed,
    pub b: Fixed,
    pub c: Fixed,
    pub tol: Fixed,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Report {
    Solve(SolveReport),
    Oracle(OracleReport),
    Compare(CompareReport),
    Verify(VerifyReport),
    Bench(BenchReport),
}

impl Report {
    pub fn csv_header(&self) -> &'static [&'static str] {
        match self {
            Report::Solve(_) | Report::Oracle(_) => &["index", "value", "kind", "residual"],
            Report::Compare(_) => &["index", "value", "kind", "residual", "oracle", "abs_diff"],
            Report::Verify(_) => &["quantity", "value"],
            Report::Bench(_) => &[
                "size",
                "spectrum_s",
                "roots_s",
                "eigenvalues_only_s",
                "vectors_s",
                "oracle_s",
                "max_abs_diff",
                "max_residual",
            ],
        }
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let indexed = |rows: &[EigenRow]| -> Vec<Vec<String>> {
            rows.iter()
                .enumerate()
                .map(|(k, r)| {
                    let mut out = vec![(k + 1).to_string()];
                    out.extend(r.csv());
                    out
                })
                .collect()
        };
        match self {
            Report::Solve(r) => indexed(&r.eigenvalues),
            Report::Oracle(r) => indexed(&r.eigenvalues),
            Report::Compare(r) => indexed(&r.eigenvalues)
                .into_iter()
                .zip(r.eigenvalues.iter().zip(&r.oracle))
                .map(|(mut row, (ours, theirs))| {
                    row.push(theirs.text());
                    row.push(Fixed((ours.value.0 - theirs.0).abs()).text());
                    row
                })
                .collect(),
            Report::Verify(r) => {
                let s = &r.residuals;
                let mut rows: Vec<Vec<String>> = [
                    ("anticirculant", s.anticirculant),
                    ("hankel", s.hankel),
                    ("orthogonality", s.orthogonality),
                    ("xy_inner", s.xy_inner),
                    ("x_norm_error", s.x_norm_error),
                    ("y_norm_error", s.y_norm_error),
                ]
                .iter()
                .map(|(k, v)| vec![k.to_string(), v.text()])
                .collect();
                let outside = r.brackets.iter().filter(|b| !b.inside).count();
                rows.push(vec!["brackets_outside".into(), outside.to_string()]);
                rows
            }
            Report::Bench(r) => r
                .rows
                .iter()
                .map(|t| {
                    vec![
                        t.size.to_string(),
                        t.spectrum_s.text(),
                        t.roots_s.text(),
                        t.eigenvalues_only_s.text(),
                        opt_text(t.vectors_s),
                        opt_text(t.oracle_s),
                        opt_text(t.max_abs_diff),
                        opt_text(t.max_residual),
                    ]
                })
                .collect(),
        }
    }

    /// False only for a comparison over its tolerance.
    pub fn pass(&self) -> bool {
        match self {
            Report::Compare(r) => r.pass(),
            _ => true,
        }
    }
}

/// Dense oracle eigenpairs of `H`.
pub fn oracle_of(params: &HankelParams) -> antihankel::Result<EigenDecomposition> {
    antihankel::jacobi_eigen(&build_hankel(params), crate::ORACLE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formatting() {
        assert_eq!(Fixed(1.0).text(), "1.0000000000000000e0");
        assert_eq!(serde_json::to_string(&Fixed(-0.25)).unwrap(), "-2.5000000000000000e-1");
        assert_eq!(serde_json::to_string(&Fixed(f64::NAN)).unwrap(), "null");
        let back: f64 = serde_json::from_str(&serde_json::to_string(&Fixed(0.1)).unwrap()).unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn verify_rows_name_every_residual() {
        let p = HankelParams::new(3, 1.0, -0.5, 0.25).unwrap();
        let oracle = oracle_of(&p).unwrap().values;
        let report = Report::Verify(VerifyReport::new(&p, &oracle));
        let rows = report.csv_rows();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[6], vec!["brackets_outside".to_string(), "0".to_string()]);
    }
}
