//! Sampled failure rates for the three noise models.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::simulate::{run_rounds, Extractor, Frame, NoisyFaults};
use crate::circuit::{CheckType, Schedule};
use crate::decoder::{bnb, LookupTable, SpacetimeWorkspace, SyndromeGraph};
use crate::error::{invalid, Error, Result};
use crate::lattice::ColorCode;
use crate::noise::{
    check_probability, mix_seed, sample_iid_mask, DpVariant, NoiseModel, RngStream,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub model: NoiseModel,
    pub distance: usize,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub std_err: f64,
    pub seed: u64,
    /// Circuit-level only: which checks were decoded.
    pub check_type: Option<CheckType>,
}

impl Estimate {
    /// `p_fail = failures / trials`, `std_err = sqrt(p_fail (1 - p_fail) / trials)`.
    pub fn new(
        model: NoiseModel,
        distance: usize,
        p: f64,
        trials: u64,
        failures: u64,
        seed: u64,
        check_type: Option<CheckType>,
    ) -> Self {
        let (p_fail, std_err) = estimator(trials, failures);
        Estimate {
            model,
            distance,
            p,
            trials,
            failures,
            p_fail,
            std_err,
            seed,
            check_type,
        }
    }
}

/// Sample mean and its standard error for `failures` out of `trials`.
pub fn estimator(trials: u64, failures: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

fn parity(e: u128) -> bool {
    e.count_ones() & 1 == 1
}

/// Perfect-syndrome decoding: the table parity when it fits in memory, the
/// branch and bound otherwise.
pub struct CapacityTrial {
    n: usize,
    columns: Vec<u64>,
    table: Option<LookupTable>,
}

impl CapacityTrial {
    pub fn new(code: &ColorCode) -> Result<Self> {
        if code.n() > 128 {
            return Err(Error::Guard(format!("n = {} exceeds 128", code.n())));
        }
        let columns = code.syndrome_columns()?;
        let table = if code.m() <= LookupTable::MAX_CHECKS {
            Some(crate::decoder::build_lookup_table(code)?)
        } else {
            None
        };
        Ok(CapacityTrial {
            n: code.n(),
            columns,
            table,
        })
    }

    /// Reuses a table, e.g. one loaded from the cache.
    pub fn with_table(code: &ColorCode, table: LookupTable) -> Result<Self> {
        if table.distance != code.distance || table.m != code.m() || table.n != code.n() {
            return invalid("lookup table does not match the code");
        }
        Ok(CapacityTrial {
            n: code.n(),
            columns: code.syndrome_columns()?,
            table: Some(table),
        })
    }

    fn syndrome(&self, mut e: u128) -> u64 {
        let mut s = 0;
        while e != 0 {
            s ^= self.columns[e.trailing_zeros() as usize];
            e &= e - 1;
        }
        s
    }

    fn correction_parity(&self, s: u64) -> bool {
        match &self.table {
            Some(t) => t.parity(s),
            None => bnb::min_weight_solution(&self.columns, s, None)
                .map(|o| o.weight % 2 == 1)
                .expect("full-rank check matrix"),
        }
    }

    /// True when the decoder fails on one iid sample.
    pub fn run(&self, p: f64, rng: &mut RngStream) -> bool {
        let e = sample_iid_mask(self.n, p, rng);
        parity(e) != self.correction_parity(self.syndrome(e))
    }
}

/// Shared pieces of the multi-round trials.
pub struct SpacetimeContext {
    pub graph: SyndromeGraph,
    pub rounds: usize,
    n: usize,
    m: usize,
}

/// Largest check count for the space-time decoder in campaigns.
pub const MAX_SPACETIME_CHECKS: usize = 20;

impl SpacetimeContext {
    pub fn new(code: &ColorCode, rounds: usize) -> Result<Self> {
        if code.m() > MAX_SPACETIME_CHECKS {
            return Err(Error::Guard(format!(
                "space-time decoding over 2^{} syndromes per round is out of reach; limit is d <= 7",
                code.m()
            )));
        }
        if rounds < 1 {
            return invalid("need at least one round");
        }
        Ok(SpacetimeContext {
            graph: SyndromeGraph::for_code(code)?,
            rounds,
            n: code.n(),
            m: code.m(),
        })
    }

    pub fn workspace(&self) -> SpacetimeWorkspace<'_> {
        SpacetimeWorkspace::new(&self.graph)
    }

    /// Decodes the raw history, folds the inferred corrections onto the last
    /// round, and scores the leftover with a perfect decode.
    pub fn score(&self, ws: &mut SpacetimeWorkspace, raw: &[u64], actual: u128) -> bool {
        let mut prev = 0;
        let delta: Vec<u64> = raw
            .iter()
            .map(|&s| {
                let d = s ^ prev;
                prev = s;
                d
            })
            .collect();
        let sol = ws.solve(&delta, false);
        let residual = actual ^ sol.data_sum();
        parity(residual) != self.graph.parity(self.graph.syndrome_of(residual))
    }
}

/// iid data flips accumulate each round; each syndrome bit is also flipped
/// with probability `p` when read out.
pub struct PhenomTrial {
    pub ctx: SpacetimeContext,
}

impl PhenomTrial {
    pub fn new(code: &ColorCode, rounds: usize) -> Result<Self> {
        Ok(PhenomTrial {
            ctx: SpacetimeContext::new(code, rounds)?,
        })
    }

    pub fn run(&self, ws: &mut SpacetimeWorkspace, p: f64, rng: &mut RngStream) -> bool {
        let ctx = &self.ctx;
        let mut data = 0u128;
        let mut raw = Vec::with_capacity(ctx.rounds);
        for _ in 0..ctx.rounds {
            data ^= sample_iid_mask(ctx.n, p, rng);
            let flips = sample_iid_mask(ctx.m, p, rng) as u64;
            raw.push(ctx.graph.syndrome_of(data) ^ flips);
        }
        ctx.score(ws, &raw, data)
    }
}

/// Full extraction circuits under circuit-level noise.
pub struct CircuitTrial {
    pub ctx: SpacetimeContext,
    pub extractor: Extractor,
    pub variant: DpVariant,
}

impl CircuitTrial {
    pub fn new(
        code: &ColorCode,
        schedule: &Schedule,
        rounds: usize,
        variant: DpVariant,
    ) -> Result<Self> {
        Ok(CircuitTrial {
            ctx: SpacetimeContext::new(code, rounds)?,
            extractor: Extractor::new(code, schedule)?,
            variant,
        })
    }

    /// Failure flags for (Z-check decoding of X errors, X-check decoding of
    /// Z errors) from one simulated history.
    pub fn run_both(
        &self,
        ws: &mut SpacetimeWorkspace,
        p: f64,
        rng: &mut RngStream,
    ) -> (bool, bool) {
        let mut frame = Frame::default();
        let mut faults = NoisyFaults {
            p,
            variant: self.variant,
            rng,
        };
        let (xs, zs) = run_rounds(&self.extractor, &mut frame, &mut faults, self.ctx.rounds);
        let mask = self.extractor.data_mask();
        (
            self.ctx.score(ws, &zs, frame.x & mask),
            self.ctx.score(ws, &xs, frame.z & mask),
        )
    }

    pub fn run(
        &self,
        ws: &mut SpacetimeWorkspace,
        p: f64,
        rng: &mut RngStream,
        check_type: CheckType,
    ) -> bool {
        let (z_checks, x_checks) = self.run_both(ws, p, rng);
        match check_type {
            CheckType::Z => z_checks,
            CheckType::X => x_checks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub model: NoiseModel,
    /// Required for the circuit-level model.
    pub schedule: Option<String>,
    pub distances: Vec<usize>,
    pub p_values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Rounds per trial; `None` means one round per unit of distance.
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub dp_variant: DpVariant,
}

fn model_salt(model: NoiseModel) -> u64 {
    match model {
        NoiseModel::CodeCapacity => 1,
        NoiseModel::Phenomenological => 2,
        NoiseModel::CircuitLevel => 3,
    }
}

/// Seed of one grid point; independent of the rest of the grid.
pub fn point_seed(seed: u64, model: NoiseModel, distance: usize, p: f64) -> u64 {
    mix_seed(
        mix_seed(mix_seed(seed, model_salt(model)), distance as u64),
        p.to_bits(),
    )
}

/// Counts failures over `trials` streams of the point seed in parallel. The
/// count does not depend on the number of worker threads.
fn count_parallel<W, I, F>(trials: u64, seed: u64, init: I, trial: F) -> u64
where
    I: Fn() -> W + Sync + Send,
    F: Fn(&mut W, &mut RngStream) -> u64 + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map_init(&init, |w, i| trial(w, &mut RngStream::new(seed, i)))
        .sum()
}

pub fn estimate_capacity(
    code: &ColorCode,
    trial: &CapacityTrial,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    check_probability(p)?;
    let ps = point_seed(seed, NoiseModel::CodeCapacity, code.distance, p);
    let failures = count_parallel(trials, ps, || (), |_, rng| trial.run(p, rng) as u64);
    Ok(Estimate::new(
        NoiseModel::CodeCapacity,
        code.distance,
        p,
        trials,
        failures,
        seed,
        None,
    ))
}

pub fn estimate_phenomenological(
    code: &ColorCode,
    trial: &PhenomTrial,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    check_probability(p)?;
    let ps = point_seed(seed, NoiseModel::Phenomenological, code.distance, p);
    let failures = count_parallel(
        trials,
        ps,
        || trial.ctx.workspace(),
        |ws, rng| trial.run(ws, p, rng) as u64,
    );
    Ok(Estimate::new(
        NoiseModel::Phenomenological,
        code.distance,
        p,
        trials,
        failures,
        seed,
        None,
    ))
}

/// Both check types from the same samples: `[X checks, Z checks]`.
pub fn estimate_circuit(
    code: &ColorCode,
    trial: &CircuitTrial,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<[Estimate; 2]> {
    check_probability(p)?;
    let ps = point_seed(seed, NoiseModel::CircuitLevel, code.distance, p);
    let both = count_parallel(
        trials,
        ps,
        || trial.ctx.workspace(),
        |ws, rng| {
            let (z_checks, x_checks) = trial.run_both(ws, p, rng);
            ((x_checks as u64) << 32) | z_checks as u64
        },
    );
    let (x_fail, z_fail) = (both >> 32, both & 0xffff_ffff);
    let est = |f, t| {
        Estimate::new(
            NoiseModel::CircuitLevel,
            code.distance,
            p,
            trials,
            f,
            seed,
            Some(t),
        )
    };
    Ok([est(x_fail, CheckType::X), est(z_fail, CheckType::Z)])
}

/// Runs the whole grid. When `sink` is given each point's rows are written
/// and flushed as soon as they are done.
pub fn run_campaign(
    spec: &CampaignSpec,
    sink: Option<&mut csv::Writer<Box<dyn Write>>>,
) -> Result<Vec<Estimate>> {
    run_campaign_with_tables(spec, sink, &mut |_| Ok(None))
}

/// As [`run_campaign`], with `tables` supplying prebuilt lookup tables for
/// code-capacity points; `None` builds one in memory.
pub fn run_campaign_with_tables(
    spec: &CampaignSpec,
    mut sink: Option<&mut csv::Writer<Box<dyn Write>>>,
    tables: &mut dyn FnMut(&ColorCode) -> Result<Option<LookupTable>>,
) -> Result<Vec<Estimate>> {
    for &p in &spec.p_values {
        check_probability(p)?;
    }
    if spec.trials >= 1 << 32 {
        return invalid("at most 2^32 - 1 trials per point");
    }
    let schedule_template = match (spec.model, &spec.schedule) {
        (NoiseModel::CircuitLevel, Some(name)) => Some(crate::circuit::template_by_name(name)?),
        (NoiseModel::CircuitLevel, None) => {
            return invalid("circuit-level campaigns need a schedule")
        }
        _ => None,
    };
    let mut out = Vec::new();
    for &d in &spec.distances {
        if spec.p_values.is_empty() {
            break;
        }
        let code = crate::lattice::build_code(d)?;
        let rounds = spec.rounds.unwrap_or(d);
        let mut rows = Vec::new();
        match spec.model {
            NoiseModel::CodeCapacity => {
                let trial = match tables(&code)? {
                    Some(t) => CapacityTrial::with_table(&code, t)?,
                    None => CapacityTrial::new(&code)?,
                };
                for &p in &spec.p_values {
                    rows.push(vec![estimate_capacity(
                        &code,
                        &trial,
                        p,
                        spec.trials,
                        spec.seed,
                    )?]);
                }
            }
            NoiseModel::Phenomenological => {
                let trial = PhenomTrial::new(&code, rounds)?;
                for &p in &spec.p_values {
                    rows.push(vec![estimate_phenomenological(
                        &code,
                        &trial,
                        p,
                        spec.trials,
                        spec.seed,
                    )?]);
                }
            }
            NoiseModel::CircuitLevel => {
                let schedule = schedule_template
                    .as_ref()
                    .expect("checked above")
                    .instantiate(&code)?;
                let trial = CircuitTrial::new(&code, &schedule, rounds, spec.dp_variant)?;
                for &p in &spec.p_values {
                    rows.push(estimate_circuit(&code, &trial, p, spec.trials, spec.seed)?.to_vec());
                }
            }
        }
        for point in rows {
            if let Some(w) = sink.as_deref_mut() {
                for e in &point {
                    w.serialize(e)
                        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                }
                w.flush()?;
            }
            out.extend(point);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_code;

    #[test]
    fn estimator_formula() {
        let (p, se) = estimator(1000, 100);
        assert_eq!(p, 0.1);
        assert!((se - (0.1f64 * 0.9 / 1000.0).sqrt()).abs() < 1e-18);
        assert_eq!(estimator(0, 0), (0.0, 0.0));
    }

    #[test]
    fn extremes_of_capacity_trials() {
        let code = build_code(5).unwrap();
        let t = CapacityTrial::new(&code).unwrap();
        let mut rng = RngStream::new(3, 0);
        assert!((0..200).all(|_| !t.run(0.0, &mut rng)));
        assert!((0..20).all(|_| t.run(1.0, &mut rng)));
    }

    #[test]
    fn table_and_search_agree() {
        let code = build_code(5).unwrap();
        let t = CapacityTrial::new(&code).unwrap();
        let mut slow = CapacityTrial::new(&code).unwrap();
        slow.table = None;
        for i in 0..300 {
            let (mut a, mut b) = (RngStream::new(9, i), RngStream::new(9, i));
            assert_eq!(t.run(0.12, &mut a), slow.run(0.12, &mut b));
        }
    }

    #[test]
    fn noiseless_multi_round_trials_never_fail() {
        let code = build_code(5).unwrap();
        let ph = PhenomTrial::new(&code, 5).unwrap();
        let mut ws = ph.ctx.workspace();
        let mut rng = RngStream::new(1, 1);
        assert!((0..50).all(|_| !ph.run(&mut ws, 0.0, &mut rng)));
    }

    #[test]
    fn distance_one_phenomenological_fails_at_rate_p() {
        let code = build_code(1).unwrap();
        let trial = PhenomTrial::new(&code, 1).unwrap();
        let e = estimate_phenomenological(&code, &trial, 0.3, 20_000, 5).unwrap();
        assert!((e.p_fail - 0.3).abs() < 5.0 * (0.3f64 * 0.7 / 20_000.0).sqrt());
    }

    #[test]
    fn empty_grid_gives_nothing() {
        let spec = CampaignSpec {
            model: NoiseModel::CodeCapacity,
            schedule: None,
            distances: vec![3, 5],
            p_values: vec![],
            trials: 10,
            seed: 1,
            rounds: None,
            dp_variant: DpVariant::default(),
        };
        assert!(run_campaign(&spec, None).unwrap().is_empty());
    }

    #[test]
    fn campaign_is_reproducible() {
        let spec = CampaignSpec {
            model: NoiseModel::Phenomenological,
            schedule: None,
            distances: vec![3],
            p_values: vec![0.02, 0.04],
            trials: 300,
            seed: 11,
            rounds: None,
            dp_variant: DpVariant::default(),
        };
        assert_eq!(
            run_campaign(&spec, None).unwrap(),
            run_campaign(&spec, None).unwrap()
        );
    }
}
