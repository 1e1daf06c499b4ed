//! Bisection on the trace bound `β`.

use crate::error::{Error, Result};

/// Outcome of one probe at a fixed `β`.
pub trait Probe {
    type Witness;
    /// `Some` when `β` is certified feasible.
    fn probe(&mut self, beta: f64) -> Option<Self::Witness>;
}

impl<W, F: FnMut(f64) -> Option<W>> Probe for F {
    type Witness = W;
    fn probe(&mut self, beta: f64) -> Option<W> {
        self(beta)
    }
}

#[derive(Debug, Clone)]
pub struct BisectResult<W> {
    pub beta: f64,
    pub witness: W,
    /// Largest probed `β` that failed (or the initial `lo`).
    pub lower: f64,
    pub probes: usize,
}

/// Smallest feasible `β` in `[lo, hi]` to within `tol_beta`. The upper end
/// must be feasible; `lo` is taken as infeasible without probing.
pub fn bisect_beta<P: Probe>(
    probe: &mut P,
    lo: f64,
    hi: f64,
    tol_beta: f64,
) -> Result<BisectResult<P::Witness>> {
    if !(lo >= 0.0 && hi >= lo && tol_beta > 0.0) {
        return Err(Error::BracketInvalid(format!(
            "need 0 <= lo <= hi and tol > 0, got [{lo}, {hi}], tol {tol_beta}"
        )));
    }
    let mut witness = probe.probe(hi).ok_or(Error::UpperBoundInfeasible(hi))?;
    let (mut lo, mut hi) = (lo, hi);
    let mut probes = 1;
    while hi - lo > tol_beta {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        match probe.probe(mid) {
            Some(w) => {
                hi = mid;
                witness = w;
            }
            None => lo = mid,
        }
    }
    Ok(BisectResult {
        beta: hi,
        witness,
        lower: lo,
        probes,
    })
}
