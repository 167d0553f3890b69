//! One row of scalar diagnostics per sampled time.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub e_total: f64,
    pub e_boundary: f64,
    /// Cumulative dissipated energy `Σ dt·ε∫((u^{k+1} − u^k)/dt)²`.
    pub dissipation: f64,
    pub sup_xi: Option<f64>,
    pub int_abs_xi: Option<f64>,
    pub radius_est: Option<f64>,
    pub angle_min: Option<f64>,
    pub angle_max: Option<f64>,
    pub sup_eps_grad: Option<f64>,
    /// `G` of each monotonicity probe.
    pub probes: Vec<Option<f64>>,
    /// `∫φ dμ_t − ∫φ dμ_0` for each Brakke test function.
    pub brakke_lhs: Vec<Option<f64>>,
    /// Time integral from 0 to t of the varifold-side Brakke integrand.
    pub brakke_rhs: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsTable {
    pub rows: Vec<DiagnosticsRow>,
    /// `max |u|` over every step of the run, not only sampled ones.
    pub max_abs_u: f64,
    pub steps: u64,
}

impl DiagnosticsTable {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn first(&self) -> Result<&DiagnosticsRow> {
        self.rows.first().ok_or(Error::EmptyTable)
    }

    pub fn last(&self) -> Result<&DiagnosticsRow> {
        self.rows.last().ok_or(Error::EmptyTable)
    }

    /// Row whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&DiagnosticsRow> {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Linear interpolation of a column at time `t`.
    pub fn interpolate<F: Fn(&DiagnosticsRow) -> Option<f64>>(
        &self,
        t: f64,
        col: F,
    ) -> Option<f64> {
        let k = self.rows.iter().position(|r| r.t >= t)?;
        let hi = &self.rows[k];
        if k == 0 || hi.t == t {
            return col(hi);
        }
        let lo = &self.rows[k - 1];
        let (a, b) = (col(lo)?, col(hi)?);
        let w = (t - lo.t) / (hi.t - lo.t);
        Some(a + w * (b - a))
    }

    /// Largest increase of `E_total` between consecutive rows.
    pub fn max_energy_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].e_total - w[0].e_total)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Column names in the documented CSV order.
    pub fn column_names(&self) -> Vec<String> {
        let mut cols: Vec<String> = [
            "t",
            "E_total",
            "E_boundary",
            "dissipation",
            "sup_xi",
            "int_abs_xi",
            "radius_est",
            "angle_min",
            "angle_max",
            "sup_eps_grad",
        ]
        .iter()
        .map(|s| String::from(*s))
        .collect();
        let (np, nb) = self
            .rows
            .first()
            .map(|r| (r.probes.len(), r.brakke_lhs.len()))
            .unwrap_or((0, 0));
        for k in 1..=np {
            cols.push(alloc::format!("G_{k}"));
        }
        for k in 1..=nb {
            cols.push(alloc::format!("brakke_lhs_{k}"));
            cols.push(alloc::format!("brakke_rhs_{k}"));
        }
        cols
    }

    /// Row values in [`column_names`](Self::column_names) order.
    pub fn row_values(row: &DiagnosticsRow) -> Vec<Option<f64>> {
        let mut v = alloc::vec![
            Some(row.t),
            Some(row.e_total),
            Some(row.e_boundary),
            Some(row.dissipation),
            row.sup_xi,
            row.int_abs_xi,
            row.radius_est,
            row.angle_min,
            row.angle_max,
            row.sup_eps_grad,
        ];
        v.extend(row.probes.iter().copied());
        for (l, r) in row.brakke_lhs.iter().zip(&row.brakke_rhs) {
            v.push(*l);
            v.push(*r);
        }
        v
    }
}
