//! Published reference values, loaded from `data/reference_values.toml`.
//! These are inputs for comparison only and never feed a computation.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const RAW: &str = include_str!("../data/reference_values.toml");

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceData {
    pub source: String,
    pub table1: Table1,
    pub table2: Table2,
    pub slopes: Slopes,
    pub examples: Examples,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub optimal: Vec<OptimalRow>,
    pub extra: Table1Extra,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table1Row {
    pub circuit: String,
    pub mean: f64,
    pub variance: f64,
    pub ci: [f64; 2],
    pub relative_error: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct OptimalRow {
    pub circuit: String,
    pub tcount: u32,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table1Extra {
    pub online_tcounts: Vec<f64>,
    pub mantissa_magnitude: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table2 {
    pub n_t: Vec<u32>,
    pub abs_u: Vec<f64>,
}

impl Table2 {
    pub fn pairs(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.n_t.iter().copied().zip(self.abs_u.iter().copied())
    }

    pub fn get(&self, n_t: u32) -> Option<f64> {
        self.pairs().find(|p| p.0 == n_t).map(|p| p.1)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Slopes {
    pub composed: f64,
    pub composed_intercept: f64,
    pub floating: f64,
    pub floating_ci: [f64; 2],
    pub floating_intercept: f64,
    pub optimal: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Examples {
    pub pi_over_2_8_mean: f64,
    pub pi_over_2_8_min_optimal_tcount: u32,
    pub crossover_exponent: f64,
}

pub fn reference() -> &'static ReferenceData {
    static DATA: OnceLock<ReferenceData> = OnceLock::new();
    DATA.get_or_init(|| toml::from_str(RAW).expect("bundled reference data parses"))
}
