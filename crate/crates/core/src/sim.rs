//! Replication automaton with parallel update and periodic boundaries.
//!
//! An occupied site survives with probability `p`. An empty site becomes
//! occupied with probability `1 - (1 - q)^k`, `k` being the number of occupied
//! nearest neighbours.

use rand::RngCore;

use crate::error::ParamError;
use crate::field::SpaceTimeField;
use crate::rng::{row_stream, uniform};

pub const DEFAULT_INIT_DENSITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Spatial sites `N`.
    pub n_sites: usize,
    /// Time steps `T`; the field holds `T + 1` rows.
    pub n_steps: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    /// Occupation probability of each site at `t = 0`.
    pub init_density: f64,
}

impl SimParams {
    pub fn new(n_sites: usize, n_steps: usize, p: f64, q: f64, seed: u64) -> Result<Self, ParamError> {
        let params = Self {
            n_sites,
            n_steps,
            p,
            q,
            seed,
            init_density: DEFAULT_INIT_DENSITY,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_init_density(mut self, density: f64) -> Result<Self, ParamError> {
        self.init_density = density;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n_sites < 3 {
            return Err(ParamError::TooFewSites(self.n_sites));
        }
        if self.n_steps == 0 {
            return Err(ParamError::NoSteps);
        }
        check_prob("p", self.p)?;
        check_prob("q", self.q)?;
        check_prob("init_density", self.init_density)
    }

    pub fn n_rows(&self) -> usize {
        self.n_steps + 1
    }
}

pub(crate) fn check_prob(name: &'static str, value: f64) -> Result<(), ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ParamError::Probability { name, value })
    }
}

/// Probability that the centre is occupied at the next step.
pub fn rule_prob(center: bool, left: bool, right: bool, p: f64, q: f64) -> f64 {
    if center {
        return p;
    }
    match u8::from(left) + u8::from(right) {
        0 => 0.0,
        1 => q,
        _ => q * (2.0 - q),
    }
}

/// Transition probabilities indexed by `left | center << 1 | right << 2`.
fn rule_table(p: f64, q: f64) -> [f64; 8] {
    let mut table = [0.0; 8];
    for (k, slot) in table.iter_mut().enumerate() {
        *slot = rule_prob(k & 2 != 0, k & 1 != 0, k & 4 != 0, p, q);
    }
    table
}

/// One synchronous update of a periodic row. Reads exactly one `u64` per site.
pub fn step<R: RngCore + ?Sized>(row: &[bool], params: &SimParams, rng: &mut R) -> Vec<bool> {
    let table = rule_table(params.p, params.q);
    let mut out = Vec::with_capacity(row.len());
    step_into(row, &table, rng, &mut out);
    out
}

fn step_into<R: RngCore + ?Sized>(row: &[bool], table: &[f64; 8], rng: &mut R, out: &mut Vec<bool>) {
    let n = row.len();
    out.clear();
    for i in 0..n {
        let left = row[(i + n - 1) % n];
        let right = row[(i + 1) % n];
        let idx = usize::from(left) | usize::from(row[i]) << 1 | usize::from(right) << 2;
        let u = uniform(rng);
        out.push(u < table[idx]);
    }
}

/// Runs the automaton for `n_steps` steps from a Bernoulli initial row.
pub fn simulate(params: &SimParams) -> SpaceTimeField {
    let n = params.n_sites;
    let mut field = SpaceTimeField::zeros(n, params.n_rows());

    let mut rng = row_stream(params.seed, n, 0);
    let mut row: Vec<bool> = (0..n).map(|_| uniform(&mut rng) < params.init_density).collect();
    field.set_row(0, &row);

    let table = rule_table(params.p, params.q);
    let mut next = Vec::with_capacity(n);
    for t in 1..params.n_rows() {
        // rows 0..t have consumed exactly t * n draws, so the stream is already at row t
        step_into(&row, &table, &mut rng, &mut next);
        std::mem::swap(&mut row, &mut next);
        field.set_row(t, &row);
    }
    field
}

/// Smallest `t` with an empty row, if any.
pub fn extinction_time(field: &SpaceTimeField) -> Option<usize> {
    (0..field.n_rows()).find(|&t| field.row_is_empty(t))
}

/// Isotropic control field: every cell independently occupied with probability `p_b`.
pub fn bernoulli_field(n_sites: usize, n_rows: usize, p_b: f64, seed: u64) -> Result<SpaceTimeField, ParamError> {
    check_prob("p_b", p_b)?;
    let mut field = SpaceTimeField::zeros(n_sites, n_rows);
    let mut rng = row_stream(seed, n_sites, 0);
    for t in 0..n_rows {
        for i in 0..n_sites {
            if uniform(&mut rng) < p_b {
                field.set(t, i, true);
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::row_stream;

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|b| b == b'1').collect()
    }

    #[test]
    fn rule_prob_table() {
        assert_eq!(rule_prob(true, true, true, 0.3, 0.7), 0.3);
        assert!((rule_prob(false, true, true, 0.3, 0.9) - 0.99).abs() < 1e-12);
        assert_eq!(rule_prob(false, false, false, 0.3, 0.9), 0.0);
        assert_eq!(rule_prob(false, true, false, 0.3, 0.5), 0.5);
        assert_eq!(rule_prob(false, false, true, 0.3, 0.5), 0.5);
    }

    #[test]
    fn step_edge_cases() {
        let params = SimParams::new(4, 1, 1.0, 1.0, 0).unwrap();
        let mut rng = row_stream(0, 4, 0);
        assert_eq!(step(&bits("0110"), &params, &mut rng), bits("1111"));

        let params = SimParams::new(3, 1, 0.0, 0.0, 0).unwrap();
        assert_eq!(step(&bits("101"), &params, &mut rng), bits("000"));

        let params = SimParams::new(5, 1, 0.7, 0.7, 0).unwrap();
        for _ in 0..100 {
            assert_eq!(step(&bits("00000"), &params, &mut rng), bits("00000"));
        }
    }

    #[test]
    fn step_consumes_one_draw_per_site() {
        let params = SimParams::new(6, 1, 0.0, 0.0, 0).unwrap();
        let mut a = row_stream(9, 6, 0);
        let mut b = row_stream(9, 6, 1);
        step(&bits("000000"), &params, &mut a);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn params_rejected() {
        assert_eq!(SimParams::new(2, 10, 0.5, 0.5, 0), Err(ParamError::TooFewSites(2)));
        assert!(SimParams::new(3, 0, 0.5, 0.5, 0).is_err());
        assert!(SimParams::new(3, 1, 1.5, 0.5, 0).is_err());
        assert!(SimParams::new(3, 1, 0.5, -0.1, 0).is_err());
        assert!(SimParams::new(3, 1, 0.5, 0.5, 0).unwrap().with_init_density(2.0).is_err());
        assert!(SimParams::new(3, 1, f64::NAN, 0.5, 0).is_err());
    }

    #[test]
    fn frozen_dynamics() {
        let params = SimParams::new(20, 30, 0.0, 0.0, 3).unwrap().with_init_density(1.0).unwrap();
        let f = simulate(&params);
        assert_eq!(f.row_count_ones(0), 20);
        assert!((1..f.n_rows()).all(|t| f.row_is_empty(t)));
        assert_eq!(extinction_time(&f), Some(1));

        let params = SimParams::new(20, 30, 1.0, 0.2, 3).unwrap().with_init_density(1.0).unwrap();
        let f = simulate(&params);
        assert_eq!(f.count_ones(), 20 * 31);
        assert_eq!(extinction_time(&f), None);

        let params = SimParams::new(20, 30, 0.5, 0.5, 3).unwrap().with_init_density(0.0).unwrap();
        assert_eq!(extinction_time(&simulate(&params)), Some(0));
    }

    #[test]
    fn simulate_is_deterministic() {
        let params = SimParams::new(37, 200, 0.4, 0.8, 77).unwrap();
        assert_eq!(simulate(&params), simulate(&params));
        assert_ne!(simulate(&params), simulate(&params.with_seed(78)));
    }

    #[test]
    fn bernoulli_extremes() {
        assert_eq!(bernoulli_field(13, 9, 0.0, 1).unwrap().count_ones(), 0);
        assert_eq!(bernoulli_field(13, 9, 1.0, 1).unwrap().count_ones(), 13 * 9);
        assert!(bernoulli_field(13, 9, 1.2, 1).is_err());
    }

    #[test]
    fn bernoulli_half_density_within_three_sigma() {
        let (n, rows) = (50, 2000);
        let f = bernoulli_field(n, rows, 0.5, 2024).unwrap();
        let cells = (n * rows) as f64;
        let sigma = (cells * 0.25).sqrt();
        assert!((f.count_ones() as f64 - cells * 0.5).abs() <= 3.0 * sigma);
    }
}
