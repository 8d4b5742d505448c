//! Time-stamped field snapshots with per-snapshot scalar diagnostics.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, ComplexField, Lp};

/// Scalar diagnostics recorded at each snapshot time.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticRecord {
    pub mass: f64,
    pub h1: f64,
    pub energy: f64,
}

/// Strictly increasing snapshot times, one field and one diagnostic record each.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    snapshots: Vec<ComplexField>,
    diagnostics: Vec<DiagnosticRecord>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, field: ComplexField, diag: DiagnosticRecord) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidConfig(format!(
                    "snapshot times must increase strictly: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.snapshots.push(field);
        self.diagnostics.push(diag);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[ComplexField] {
        &self.snapshots
    }

    pub fn diagnostics(&self) -> &[DiagnosticRecord] {
        &self.diagnostics
    }

    pub fn last_field(&self) -> Option<&ComplexField> {
        self.snapshots.last()
    }

    /// Keep every m-th snapshot starting from the first; a uniformly sampled
    /// trajectory stays uniform, with m-fold coarser spacing.
    pub fn subsample(&self, m: usize) -> Self {
        let m = m.max(1);
        let pick = |k: usize| k.is_multiple_of(m);
        Self {
            times: self.times.iter().enumerate().filter(|(k, _)| pick(*k)).map(|(_, &t)| t).collect(),
            snapshots: self
                .snapshots
                .iter()
                .enumerate()
                .filter(|(k, _)| pick(*k))
                .map(|(_, f)| f.clone())
                .collect(),
            diagnostics: self
                .diagnostics
                .iter()
                .enumerate()
                .filter(|(k, _)| pick(*k))
                .map(|(_, &d)| d)
                .collect(),
        }
    }

    /// Drop every snapshot with time > t_cut.
    pub fn truncated(&self, t_cut: f64) -> Self {
        let keep = self.times.iter().take_while(|&&t| t <= t_cut + 1e-12).count();
        Self {
            times: self.times[..keep].to_vec(),
            snapshots: self.snapshots[..keep].to_vec(),
            diagnostics: self.diagnostics[..keep].to_vec(),
        }
    }
}

/// Space-time norm ‖u‖_{L^q_t L^p_x}: trapezoid rule in t over the snapshot
/// times, [`lp_norm`] in x. For q = ∞ the max over snapshots. Diagnostic only.
pub fn mixed_norm(tr: &Trajectory, p: Lp, q: Lp) -> Result<f64> {
    match q {
        Lp::Infinity => {
            if tr.is_empty() {
                return Err(Error::TooFewSnapshots { need: 1, got: 0 });
            }
            Ok(tr
                .snapshots()
                .iter()
                .map(|f| lp_norm(f, p))
                .fold(0.0, f64::max))
        }
        Lp::P(q) => {
            if tr.len() < 2 {
                return Err(Error::TooFewSnapshots { need: 2, got: tr.len() });
            }
            let vals: Vec<f64> = tr.snapshots().iter().map(|f| lp_norm(f, p).powf(q)).collect();
            let mut acc = 0.0;
            for k in 0..tr.len() - 1 {
                let dt = tr.times()[k + 1] - tr.times()[k];
                acc += 0.5 * dt * (vals[k] + vals[k + 1]);
            }
            Ok(acc.powf(1.0 / q))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian_profile, SpatialGrid};
    use crate::propagator::free_propagate;

    fn diag() -> DiagnosticRecord {
        DiagnosticRecord { mass: 0.0, h1: 0.0, energy: 0.0 }
    }

    #[test]
    fn times_must_increase() {
        let g = SpatialGrid::new(64, 10.0).unwrap();
        let f = ComplexField::zeros(g);
        let mut tr = Trajectory::default();
        tr.push(0.0, f.clone(), diag()).unwrap();
        assert!(tr.push(0.0, f, diag()).is_err());
    }

    #[test]
    fn single_snapshot_sup_in_time_is_lp() {
        let g = SpatialGrid::new(512, 16.0 * std::f64::consts::PI).unwrap();
        let f = gaussian_profile(&g, 1.0, 1.0, 0.0, 0.0).unwrap();
        let mut tr = Trajectory::default();
        tr.push(0.0, f.clone(), diag()).unwrap();
        let m = mixed_norm(&tr, Lp::P(4.0), Lp::Infinity).unwrap();
        assert_eq!(m, lp_norm(&f, Lp::P(4.0)));
        assert!(mixed_norm(&tr, Lp::P(4.0), Lp::P(6.0)).is_err());
    }

    #[test]
    fn constant_in_time_scales_with_horizon() {
        let g = SpatialGrid::new(512, 16.0 * std::f64::consts::PI).unwrap();
        let f = gaussian_profile(&g, 1.0, 1.0, 0.0, 0.0).unwrap();
        let mut tr = Trajectory::default();
        for k in 0..=10 {
            tr.push(0.2 * k as f64, f.clone(), diag()).unwrap();
        }
        let t_end: f64 = 2.0;
        let q = 6.0;
        let m = mixed_norm(&tr, Lp::P(6.0), Lp::P(q)).unwrap();
        let expect = t_end.powf(1.0 / q) * lp_norm(&f, Lp::P(6.0));
        assert!((m - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn free_evolution_mixed_norm_monotone_under_truncation() {
        let g = SpatialGrid::new(512, 16.0 * std::f64::consts::PI).unwrap();
        let f = gaussian_profile(&g, 1.0, 1.0, 0.0, 0.0).unwrap();
        let mut tr = Trajectory::default();
        for k in 0..=20 {
            let t = 0.05 * k as f64;
            tr.push(t, free_propagate(&f, t), diag()).unwrap();
        }
        let full = mixed_norm(&tr, Lp::P(6.0), Lp::P(6.0)).unwrap();
        let half = mixed_norm(&tr.truncated(0.5), Lp::P(6.0), Lp::P(6.0)).unwrap();
        assert!(half < full);
    }
}
