//! Stability verdict for a sweep over `p`.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::sweep::SweepRow;

/// Largest allowed relative change between adjacent `p` values.
pub const MAX_JUMP: f64 = 0.25;
/// Classical exponent magnitude required at the points closest to 2.
pub const CLASSICAL_THRESHOLD: f64 = 100.0;
/// The closest points on each side must lie within this distance of 2.
pub const NEAR_TWO: f64 = 0.01;
/// Points needed on each side of 2.
pub const MIN_PER_SIDE: usize = 3;

// 1/(2.01 - 2) is 99.99999999999982 in floating point
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub thm1_exp_jump: f64,
    pub thm2_exp_jump: f64,
    pub thm1_c_jump: f64,
    pub thm2_c_jump: f64,
    /// Smaller of the classical exponent magnitudes at the points closest to 2.
    pub classical_near_two: f64,
    pub undefined_at_two: bool,
    pub reasons: Vec<String>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.pass { "PASS" } else { "FAIL" })?;
        writeln!(f, "  max jump thm1 exponent  {:.4}", self.thm1_exp_jump)?;
        writeln!(f, "  max jump thm2 exponent  {:.4}", self.thm2_exp_jump)?;
        writeln!(f, "  max jump thm1 constant  {:.4}", self.thm1_c_jump)?;
        writeln!(f, "  max jump thm2 constant  {:.4}", self.thm2_c_jump)?;
        writeln!(f, "  classical exponent near p = 2  {:.4e}", self.classical_near_two)?;
        write!(f, "  classical exponents undefined at p = 2: {}", self.undefined_at_two)?;
        for r in &self.reasons {
            write!(f, "\n  - {r}")?;
        }
        Ok(())
    }
}

pub fn read_sweep<R: Read>(r: R) -> Result<Vec<SweepRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn read_sweep_file(path: &Path) -> Result<Vec<SweepRow>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    read_sweep(file)
}

fn relative_jump(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().min(b.abs())
    }
}

/// Largest relative jump between neighbours; `None` when a value is missing.
fn max_jump(rows: &[SweepRow], get: impl Fn(&SweepRow) -> Option<f64>) -> Option<f64> {
    let vals: Option<Vec<f64>> = rows.iter().map(&get).collect();
    vals.map(|v| v.windows(2).map(|w| relative_jump(w[0], w[1])).fold(0.0, f64::max))
}

pub fn stability_report(rows: &[SweepRow]) -> Result<Verdict, CliError> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));
    if rows.windows(2).any(|w| w[0].p == w[1].p) {
        return Err(CliError::InsufficientData(
            "sweep repeats a p value; report needs a sweep over p".into(),
        ));
    }
    let below: Vec<&SweepRow> = rows.iter().filter(|r| r.p < 2.0).collect();
    let above: Vec<&SweepRow> = rows.iter().filter(|r| r.p > 2.0).collect();
    if below.len() < MIN_PER_SIDE || above.len() < MIN_PER_SIDE {
        return Err(CliError::InsufficientData(format!(
            "need at least {MIN_PER_SIDE} p values on each side of 2, got {} below and {} above",
            below.len(),
            above.len()
        )));
    }

    let mut reasons = Vec::new();
    let mut jump = |name: &str, get: fn(&SweepRow) -> Option<f64>| match max_jump(&rows, get) {
        Some(j) => {
            if !(j < MAX_JUMP) {
                reasons.push(format!("{name} jumps by {j:.4} between adjacent p"));
            }
            j
        }
        None => {
            reasons.push(format!("{name} missing for some p"));
            f64::INFINITY
        }
    };
    let thm1_exp_jump = jump("thm1 exponent", |r| r.thm1_exp);
    let thm2_exp_jump = jump("thm2 exponent", |r| r.thm2_exp);
    let thm1_c_jump = jump("thm1 constant", |r| r.thm1_c);
    let thm2_c_jump = jump("thm2 constant", |r| r.thm2_c);

    let nearest_below = below.last().expect("checked above");
    let nearest_above = above.first().expect("checked above");
    let mut classical_near_two = f64::INFINITY;
    for (r, value) in [
        (nearest_below, nearest_below.sing_exp),
        (nearest_above, nearest_above.deg_exp),
    ] {
        if (r.p - 2.0).abs() > NEAR_TWO * (1.0 + THRESHOLD_SLACK) {
            reasons.push(format!("closest point p = {} is farther than {NEAR_TWO} from 2", r.p));
        }
        match value {
            Some(e) => classical_near_two = classical_near_two.min(e.abs()),
            None => {
                reasons.push(format!("classical exponent missing at p = {}", r.p));
                classical_near_two = 0.0;
            }
        }
    }
    if classical_near_two < CLASSICAL_THRESHOLD * (1.0 - THRESHOLD_SLACK) {
        reasons.push(format!(
            "classical exponent {classical_near_two:.4} near p = 2 is below {CLASSICAL_THRESHOLD}"
        ));
    }
    let undefined_at_two = rows
        .iter()
        .filter(|r| r.p == 2.0)
        .all(|r| r.deg_exp.is_none() && r.sing_exp.is_none());
    if !undefined_at_two {
        reasons.push("classical exponent defined at p = 2".into());
    }

    Ok(Verdict {
        pass: reasons.is_empty(),
        thm1_exp_jump,
        thm2_exp_jump,
        thm1_c_jump,
        thm2_c_jump,
        classical_near_two,
        undefined_at_two,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pstable_core::iteration2::exponent_row;

    fn synthetic(ps: &[f64]) -> Vec<SweepRow> {
        ps.iter()
            .map(|&p| {
                let e = exponent_row(p, 2);
                SweepRow {
                    p,
                    n_dim: 2,
                    thm1_exp: e.thm1,
                    thm2_exp: e.thm2,
                    deg_exp: e.deg,
                    sing_exp: e.sing,
                    delta0: e.delta0,
                    sigma: 0.5,
                    nx: 41,
                    sup: 1.0,
                    bound: Some(2.0),
                    ratio: Some(0.5),
                    thm1_c: Some(1.0 + 0.1 * p),
                    thm2_c: Some(2.0 - 0.1 * p),
                    c0: Some(1.0),
                    passed: true,
                }
            })
            .collect()
    }

    const PS: [f64; 7] = [1.90, 1.95, 1.99, 2.00, 2.01, 2.05, 2.10];

    #[test]
    fn smooth_sweep_passes() {
        let v = stability_report(&synthetic(&PS)).unwrap();
        assert!(v.pass, "{v}");
        assert!(v.classical_near_two > 99.0);
    }

    #[test]
    fn order_does_not_matter() {
        let mut rows = synthetic(&PS);
        rows.reverse();
        assert!(stability_report(&rows).unwrap().pass);
    }

    #[test]
    fn jump_in_constant_fails() {
        let mut rows = synthetic(&PS);
        rows[4].thm1_c = Some(10.0);
        let v = stability_report(&rows).unwrap();
        assert!(!v.pass);
        assert!(v.reasons[0].contains("thm1 constant"));
    }

    #[test]
    fn far_from_two_fails() {
        let v = stability_report(&synthetic(&[1.7, 1.8, 1.9, 2.1, 2.2, 2.3])).unwrap();
        assert!(!v.pass);
        assert!(v.classical_near_two < 11.0);
    }

    #[test]
    fn too_few_points() {
        let r = stability_report(&synthetic(&[1.9, 1.95, 2.0, 2.05, 2.1, 2.2]));
        assert!(matches!(r, Err(CliError::InsufficientData(_))));
    }

    #[test]
    fn csv_round_trip() {
        let rows = synthetic(&PS);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        crate::sweep::write_sweep(&path, 3, &rows).unwrap();
        assert_eq!(read_sweep_file(&path).unwrap(), rows);
    }

    #[test]
    fn relative_jump_examples() {
        assert_eq!(relative_jump(1.0, 1.0), 0.0);
        assert!((relative_jump(1.0, 1.2) - 0.2).abs() < 1e-15);
        assert!((relative_jump(1.2, 1.0) - 0.2).abs() < 1e-15);
    }
}
