use std::io::Write;

use serde::Serialize;

/// One solver run, successful or not.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub problem: String,
    pub solver: String,
    /// Regularization: lambda for covariance selection, C for logistic
    /// regression.
    pub param: f64,
    pub seconds: f64,
    pub iterations: usize,
    pub max_supp: usize,
    pub supp: usize,
    pub objective: f64,
    pub converged: bool,
    pub work: u64,
    /// `seconds(iterations)`.
    pub cell: String,
    /// Objective within 1e-4 relative of the best run on the same problem.
    pub agrees: Option<bool>,
    pub config: String,
    pub error: String,
}

impl RunReport {
    pub fn failed(problem: &str, solver: &str, param: f64, config: String, error: String) -> Self {
        Self {
            problem: problem.into(),
            solver: solver.into(),
            param,
            seconds: 0.0,
            iterations: 0,
            max_supp: 0,
            supp: 0,
            objective: f64::NAN,
            converged: false,
            work: 0,
            cell: String::new(),
            agrees: None,
            config,
            error,
        }
    }

    pub fn fill_cell(&mut self) {
        self.cell = format!("{:.2}s({})", self.seconds, self.iterations);
    }
}

/// Marks rows whose objective is within `tol` relative of the smallest
/// objective among rows with the same problem and parameter.
pub fn mark_agreement(rows: &mut [RunReport], tol: f64) {
    for k in 0..rows.len() {
        let best = rows
            .iter()
            .filter(|r| r.problem == rows[k].problem && r.param == rows[k].param && r.error.is_empty())
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min);
        let r = &mut rows[k];
        r.agrees = (r.error.is_empty() && best.is_finite())
            .then(|| (r.objective - best).abs() <= tol * best.abs().max(f64::MIN_POSITIVE));
    }
}

pub fn write_reports(out: impl Write, rows: &[RunReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, objective: f64) -> RunReport {
        let mut r = RunReport::failed(problem, "s", 0.5, String::new(), String::new());
        r.objective = objective;
        r
    }

    #[test]
    fn agreement_is_per_problem() {
        let mut rows = vec![row("a", 100.0), row("a", 100.005), row("a", 100.02), row("b", 5.0)];
        rows.push(RunReport::failed("a", "t", 0.5, String::new(), "boom".into()));
        mark_agreement(&mut rows, 1e-4);
        let marks: Vec<_> = rows.iter().map(|r| r.agrees).collect();
        assert_eq!(marks, vec![Some(true), Some(true), Some(false), Some(true), None]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        write_reports(&mut buf, &[row("a", 1.0), row("b", 2.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("problem,solver,param,seconds,iterations,max_supp,supp,objective"));
    }
}
