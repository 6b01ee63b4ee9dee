use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cache::{CacheStatus, TableCache};
use super::config::{parse_distances, parse_model, parse_p_grid};
use super::{CheckArg, Command, FormArg, LatticeArg, SawModelArg, Settings};
use crate::analysis::{
    count_saps, fit_threshold, gate_thresholds, saw::walk_constant, saw_bound, FitForm, FitOptions,
    FitPoint, FitResult, GateThresholds, SapCounts, SapLattice, SawModel, SawParams,
};
use crate::circuit::{
    enumerate_hooks, template_by_name, validate_schedule, CheckType, HookReport, Schedule,
    ValidationReport,
};
use crate::decoder::{
    decode_2d, decode_3d, unpack_syndrome, DecodeProblem2D, DecodeProblem3D, LookupTable,
};
use crate::error::{invalid, Error, Result};
use crate::exact::{failure_polynomial, FailurePolynomial};
use crate::lattice::{build_code, ColorCode, Face};
use crate::montecarlo::{run_campaign_with_tables, CampaignSpec, Estimate};
use crate::noise::NoiseModel;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub distance: usize,
    pub n: usize,
    pub m: usize,
    pub logical_qubits: usize,
    pub qubits: Vec<[i64; 2]>,
    pub faces: Vec<Face>,
    pub logical_support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub distance: usize,
    pub schedule: String,
    pub schedule_hash: String,
    pub report: ValidationReport,
    pub hooks: Option<HookReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutput {
    pub distance: usize,
    /// Input syndromes in hex, one per round.
    pub syndromes: Vec<String>,
    /// Support of the data correction, one list per round.
    pub correction: Vec<Vec<usize>>,
    /// Faces whose measurement is judged wrong, one list per round.
    pub syndrome_errors: Vec<Vec<usize>>,
    pub weight: usize,
    /// Parity of the net data correction, i.e. whether it flips the logical.
    pub logical_parity: bool,
    pub optimal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SawOutput {
    pub model: SawModel,
    pub params: SawParams,
    /// Right-hand side of `p (1 - p) <= c`.
    pub walk_constant: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SapOutput {
    #[serde(flatten)]
    pub counts: SapCounts,
    pub growth_estimate: Option<f64>,
}

fn emit<T: Serialize>(
    settings: &Settings,
    value: &T,
    human: impl FnOnce() -> String,
) -> Result<()> {
    let mut out = std::io::stdout().lock();
    if settings.json {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(out, "{text}")?;
    } else {
        write!(out, "{}", human())?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

pub fn dispatch(command: &Command, settings: &Settings) -> Result<i32> {
    match command {
        Command::BuildCode { distance } => build_code_cmd(settings, *distance),
        Command::ValidateSchedule {
            code_distance,
            file,
            schedule,
            hooks,
            export,
        } => validate_cmd(
            settings,
            *code_distance,
            file.as_deref(),
            schedule.as_deref(),
            *hooks,
            export.as_deref(),
        ),
        Command::Decode {
            distance,
            syndrome,
            history,
            final_round_perfect,
        } => decode_cmd(
            settings,
            *distance,
            syndrome.as_deref(),
            history.as_deref(),
            *final_round_perfect,
        ),
        Command::Exact {
            distance,
            out,
            eval,
        } => exact_cmd(settings, *distance, out.as_deref(), eval),
        Command::Mc {
            model,
            schedule,
            distances,
            p_grid,
            trials,
            rounds,
            out,
        } => {
            let spec = campaign_spec(
                settings, model, schedule, distances, p_grid, *trials, *rounds,
            )?;
            let out = out.clone().or_else(|| settings.config.out.clone());
            mc_cmd(settings, &spec, out.as_deref())
        }
        Command::Fit {
            input,
            form,
            check_type,
            window,
            out,
        } => fit_cmd(
            settings,
            input,
            *form,
            *check_type,
            window.as_deref(),
            out.as_deref(),
        ),
        Command::Saw {
            model,
            mu,
            delta_max,
        } => saw_cmd(settings, *model, *mu, *delta_max),
        Command::Gates { p_qec, p_capacity } => {
            let g = gate_thresholds(*p_qec, *p_capacity)?;
            emit(settings, &g, || gates_table(&g))?;
            Ok(0)
        }
        Command::SapCount { lattice, l_max } => {
            let lattice = match lattice {
                LatticeArg::Square488 => SapLattice::Square488,
                LatticeArg::Prism => SapLattice::Prism,
            };
            let counts = count_saps(lattice, *l_max)?;
            let out = SapOutput {
                growth_estimate: counts.growth_estimate(),
                counts,
            };
            emit(settings, &out, || {
                let mut s = format!(
                    "patch {0}x{0} cells\nlength  polygons per cell\n",
                    out.counts.patch
                );
                for (l, c) in out
                    .counts
                    .counts
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| l % 2 == 0 && *l >= 4)
                {
                    let _ = writeln!(s, "{l:>6}  {c}");
                }
                if let Some(g) = out.growth_estimate {
                    let _ = writeln!(s, "growth estimate {g}");
                }
                s
            })?;
            Ok(0)
        }
    }
}

pub fn code_summary(code: &ColorCode) -> CodeSummary {
    CodeSummary {
        distance: code.distance,
        n: code.n(),
        m: code.m(),
        logical_qubits: code.dimension(),
        qubits: code.qubits.clone(),
        faces: code.faces.clone(),
        logical_support: code.logical_support.clone(),
    }
}

fn build_code_cmd(settings: &Settings, distance: usize) -> Result<i32> {
    let code = build_code(distance)?;
    let summary = code_summary(&code);
    emit(settings, &summary, || {
        let mut s = format!(
            "distance {}  n = {}  m = {}  k = {}\n",
            summary.distance, summary.n, summary.m, summary.logical_qubits
        );
        for f in &summary.faces {
            let _ = writeln!(
                s,
                "face {:>3}  {:?} {:?}  qubits {:?}",
                f.id, f.color, f.shape, f.qubit_ids
            );
        }
        let _ = writeln!(s, "logical support {:?}", summary.logical_support);
        s
    })?;
    Ok(0)
}

fn validate_cmd(
    settings: &Settings,
    distance: usize,
    file: Option<&Path>,
    name: Option<&str>,
    hooks: bool,
    export: Option<&Path>,
) -> Result<i32> {
    let code = build_code(distance)?;
    let schedule = match (file, name) {
        (Some(path), _) => Schedule::from_json(&read_text(path)?)?,
        (None, Some(name)) => template_by_name(name)?.instantiate(&code)?,
        (None, None) => return invalid("give --file or --schedule"),
    };
    if let Some(path) = export {
        std::fs::write(path, schedule.to_json())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    let report = validate_schedule(&code, &schedule)?;
    let hooks = if hooks && report.valid {
        Some(enumerate_hooks(&code, &schedule)?)
    } else {
        None
    };
    let out = ValidateOutput {
        distance,
        schedule: schedule.name.clone(),
        schedule_hash: schedule.hash(),
        report,
        hooks,
    };
    emit(settings, &out, || {
        let r = &out.report;
        let mut s = format!(
            "schedule {} ({})  distance {}: {}\n",
            out.schedule,
            &out.schedule_hash[..16],
            out.distance,
            if r.valid { "valid" } else { "INVALID" }
        );
        for p in &r.structural {
            let _ = writeln!(s, "  structure: {p}");
        }
        for c in &r.constraint1 {
            let _ = writeln!(s, "  collision: qubit {} at step {}", c.qubit, c.step);
        }
        for g in &r.constraint2 {
            let _ = writeln!(s, "  not preserved: {g}");
        }
        if let Some(h) = &out.hooks {
            let _ = writeln!(
                s,
                "  hooks: {} faults, max weight {} (square ancillas {}, octagon ancillas {}), histogram {:?}",
                h.faults_examined, h.max_weight, h.max_weight_square_ancilla, h.max_weight_octagon_ancilla, h.histogram
            );
        }
        s
    })?;
    Ok(if out.report.valid { 0 } else { 1 })
}

fn parse_hex_syndrome(text: &str, m: usize) -> Result<Vec<bool>> {
    let t = text.trim();
    let digits = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .unwrap_or(t);
    let s = u64::from_str_radix(digits, 16)
        .map_err(|_| Error::InvalidInput(format!("bad hex syndrome '{t}'")))?;
    if m < 64 && s >> m != 0 {
        return invalid(format!("syndrome {t} has bits beyond the {m} checks"));
    }
    Ok(unpack_syndrome(s, m))
}

fn hex_of(bits: &[bool]) -> String {
    format!("{:x}", crate::decoder::pack_syndrome(bits))
}

fn support(bits: &[bool]) -> Vec<usize> {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

fn cached_table(settings: &Settings, code: &ColorCode) -> Result<Option<LookupTable>> {
    if code.m() > LookupTable::MAX_CHECKS {
        return Ok(None);
    }
    let (table, status) = TableCache::new(settings.cache_dir.clone()).load_or_build(code)?;
    match status {
        CacheStatus::Rebuilt => eprintln!(
            "note: lookup table cache for d={} was corrupt; rebuilt",
            code.distance
        ),
        CacheStatus::Built => eprintln!("note: lookup table for d={} cached", code.distance),
        CacheStatus::Hit | CacheStatus::Disabled => {}
    }
    Ok(Some(table))
}

fn decode_cmd(
    settings: &Settings,
    distance: usize,
    syndrome: Option<&str>,
    history: Option<&str>,
    final_round_perfect: bool,
) -> Result<i32> {
    let code = build_code(distance)?;
    let m = code.m();
    let out = if let Some(text) = syndrome {
        let bits = parse_hex_syndrome(text, m)?;
        let r = decode_2d(&DecodeProblem2D {
            code: &code,
            syndrome: bits.clone(),
        })?;
        let correction = &r.data_correction[0];
        let logical_parity = match cached_table(settings, &code)? {
            Some(t) => t.parity(crate::decoder::pack_syndrome(&bits)),
            None => correction.parity(),
        };
        if logical_parity != correction.parity() {
            return Err(Error::Internal(
                "lookup table disagrees with the decoder".into(),
            ));
        }
        DecodeOutput {
            distance,
            syndromes: vec![hex_of(&bits)],
            correction: vec![correction.support()],
            syndrome_errors: Vec::new(),
            weight: r.weight,
            logical_parity,
            optimal: r.optimal,
        }
    } else {
        let raw = history
            .unwrap_or_default()
            .split(',')
            .map(|t| parse_hex_syndrome(t, m))
            .collect::<Result<Vec<_>>>()?;
        let mut problem = DecodeProblem3D::from_history(&code, &raw)?;
        problem.final_round_perfect = final_round_perfect;
        let r = decode_3d(&problem)?;
        let net = r
            .data_correction
            .iter()
            .fold(crate::lattice::ErrorPattern::zeros(code.n()), |acc, x| {
                acc.xor(x)
            });
        DecodeOutput {
            distance,
            syndromes: raw.iter().map(|b| hex_of(b)).collect(),
            correction: r.data_correction.iter().map(|x| x.support()).collect(),
            syndrome_errors: r
                .syndrome_error_assignment
                .iter()
                .map(|b| support(b))
                .collect(),
            weight: r.weight,
            logical_parity: net.parity(),
            optimal: r.optimal,
        }
    };
    emit(settings, &out, || {
        let mut s = format!(
            "distance {}  weight {}  logical parity {}\n",
            out.distance, out.weight, out.logical_parity as u8
        );
        for (t, x) in out.correction.iter().enumerate() {
            let _ = write!(
                s,
                "round {:>2}  syndrome {}  flip qubits {:?}",
                t + 1,
                out.syndromes[t],
                x
            );
            match out.syndrome_errors.get(t) {
                Some(r) => {
                    let _ = writeln!(s, "  wrong checks {r:?}");
                }
                None => s.push('\n'),
            }
        }
        s
    })?;
    Ok(0)
}

fn exact_cmd(
    settings: &Settings,
    distance: usize,
    out: Option<&Path>,
    eval: &[f64],
) -> Result<i32> {
    let code = build_code(distance)?;
    let poly: FailurePolynomial = failure_polynomial(&code)?;
    if let Some(path) = out {
        write_json(path, &poly)?;
    }
    let values = eval
        .iter()
        .map(|&p| Ok((p, poly.evaluate(p)?)))
        .collect::<Result<Vec<_>>>()?;
    if settings.json {
        // The JSON form is the polynomial itself; evaluations go to stderr.
        for (p, v) in &values {
            eprintln!("p_fail({p}) = {v}");
        }
    }
    emit(settings, &poly, || {
        let mut s = format!("distance {}  n = {}\n   k  count\n", poly.distance, poly.n);
        for (k, c) in poly.counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let _ = writeln!(s, "{k:>4}  {c}");
        }
        for (p, v) in &values {
            let _ = writeln!(s, "p_fail({p}) = {v}");
        }
        s
    })?;
    Ok(0)
}

pub fn campaign_spec(
    settings: &Settings,
    model: &Option<String>,
    schedule: &Option<String>,
    distances: &Option<String>,
    p_grid: &Option<String>,
    trials: Option<u64>,
    rounds: Option<usize>,
) -> Result<CampaignSpec> {
    let cfg = &settings.config;
    let model = match model.as_deref().or(cfg.model.as_deref()) {
        Some(m) => parse_model(m)?,
        None => return invalid("mc needs --model (capacity, phenom or circuit)"),
    };
    let distances = match distances {
        Some(d) => parse_distances(d)?,
        None => cfg.distances.clone().unwrap_or_else(|| vec![3, 5, 7]),
    };
    let p_values = match (p_grid, &cfg.p_grid) {
        (Some(g), _) => parse_p_grid(g)?,
        (None, Some(g)) => g.values()?,
        (None, None) => return invalid("mc needs --p-grid"),
    };
    let schedule = match model {
        NoiseModel::CircuitLevel => Some(
            schedule
                .clone()
                .or_else(|| cfg.schedule.clone())
                .unwrap_or_else(|| "noninterleaved".into()),
        ),
        _ => None,
    };
    let trials = trials.or(cfg.trials).unwrap_or(10_000);
    if trials == 0 {
        return invalid("--trials must be positive");
    }
    Ok(CampaignSpec {
        model,
        schedule,
        distances,
        p_values,
        trials,
        seed: settings.seed,
        rounds: rounds.or(cfg.rounds),
        dp_variant: settings.dp_variant,
    })
}

fn mc_cmd(settings: &Settings, spec: &CampaignSpec, out: Option<&Path>) -> Result<i32> {
    let sink: Option<Box<dyn Write>> = match out {
        Some(path) => Some(Box::new(std::fs::File::create(path).map_err(|e| {
            Error::InvalidInput(format!("cannot create {}: {e}", path.display()))
        })?)),
        None if !settings.json => Some(Box::new(std::io::stdout())),
        None => None,
    };
    let mut writer = sink.map(|w| csv::Writer::from_writer(w));
    let mut tables = |code: &ColorCode| cached_table(settings, code);
    let rows = run_campaign_with_tables(spec, writer.as_mut(), &mut tables)?;
    drop(writer);
    if settings.json {
        emit(settings, &rows, String::new)?;
    } else if out.is_some() {
        let mut s = String::from("model                distance  p            trials     failures   p_fail        std_err       check\n");
        for r in &rows {
            let _ = writeln!(
                s,
                "{:<20} {:>8}  {:<12} {:>9}  {:>9}  {:<12}  {:<12}  {}",
                format!("{:?}", r.model),
                r.distance,
                r.p,
                r.trials,
                r.failures,
                r.p_fail,
                r.std_err,
                r.check_type.map(|c| format!("{c:?}")).unwrap_or_default()
            );
        }
        print!("{s}");
    }
    Ok(0)
}

pub fn read_estimates(path: &Path) -> Result<Vec<Estimate>> {
    let text = read_text(path)?;
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::InvalidInput(format!("bad CSV {}: {e}", path.display()))))
        .collect()
}

fn fit_cmd(
    settings: &Settings,
    input: &Path,
    form: FormArg,
    check: Option<CheckArg>,
    window: Option<&str>,
    out: Option<&Path>,
) -> Result<i32> {
    let mut rows = read_estimates(input)?;
    let mut models: Vec<NoiseModel> = rows.iter().map(|r| r.model).collect();
    models.dedup();
    if models.windows(2).any(|w| w[0] != w[1]) {
        return invalid("the CSV mixes noise models");
    }
    let wanted = check.map(|c| match c {
        CheckArg::X => CheckType::X,
        CheckArg::Z => CheckType::Z,
    });
    if let Some(t) = wanted {
        rows.retain(|r| r.check_type == Some(t));
    } else if rows.iter().any(|r| r.check_type.is_some()) {
        let first = rows[0].check_type;
        if rows.iter().any(|r| r.check_type != first) {
            return invalid("the CSV holds both check types; choose one with --check-type");
        }
    }
    let points: Vec<FitPoint> = rows
        .iter()
        .map(|r| FitPoint {
            distance: r.distance,
            p: r.p,
            p_fail: r.p_fail,
            std_err: r.std_err,
        })
        .collect();
    let mut options = FitOptions::new(match form {
        FormArg::Linear => FitForm::Linear,
        FormArg::Quadratic => FitForm::Quadratic,
    });
    if let Some(w) = window {
        let v = parse_p_grid(w.replace(':', ",").as_str())?;
        if v.len() != 2 || v[0] >= v[1] {
            return invalid(format!("bad window '{w}'; expected lo:hi"));
        }
        options.window = (v[0], v[1]);
    }
    let fit: FitResult = fit_threshold(&points, &options)?;
    if let Some(path) = out {
        write_json(path, &fit)?;
    }
    emit(settings, &fit, || {
        let mut s = format!(
            "{:?} fit over {} points\np_c = {} +/- {}\nnu0 = {} +/- {}\nA = {} +/- {}\nB = {} +/- {}\n",
            fit.form,
            fit.points_used,
            fit.p_c,
            fit.p_c_std_err,
            fit.nu0,
            fit.nu0_std_err,
            fit.a,
            fit.a_std_err,
            fit.b,
            fit.b_std_err
        );
        if let Some(c) = fit.c {
            let _ = writeln!(s, "C = {c}");
        }
        let _ = writeln!(
            s,
            "weighted rss = {} after {} iterations",
            fit.rss, fit.iterations
        );
        s
    })?;
    Ok(0)
}

fn saw_cmd(
    settings: &Settings,
    model: SawModelArg,
    mu: Option<f64>,
    delta_max: Option<u32>,
) -> Result<i32> {
    let mut params = SawParams::default();
    let model = match model {
        SawModelArg::Capacity => {
            if delta_max.is_some() {
                return invalid("--delta-max applies to the phenom model");
            }
            params.mu = mu.unwrap_or(params.mu);
            SawModel::Capacity
        }
        SawModelArg::Phenom => {
            if mu.is_some() {
                return invalid("--mu applies to the capacity model");
            }
            params.delta_max = delta_max.unwrap_or(params.delta_max);
            SawModel::Phenom
        }
    };
    let out = SawOutput {
        model,
        params,
        walk_constant: walk_constant(&params, model)?,
        bound: saw_bound(&params, model)?,
    };
    emit(settings, &out, || {
        let knob = match model {
            SawModel::Capacity => format!("mu = {}", params.mu),
            SawModel::Phenom => format!("delta_max = {}", params.delta_max),
        };
        format!(
            "{knob}\np(1-p) <= {}\nthreshold >= {} ({:.8} %)\n",
            out.walk_constant,
            out.bound,
            100.0 * out.bound
        )
    })?;
    Ok(0)
}

fn gates_table(g: &GateThresholds) -> String {
    let mut s = format!("p_qec = {}  p_capacity = {}\n", g.p_qec, g.p_capacity);
    for (name, v) in g.entries() {
        let _ = writeln!(s, "{name:<26} {v}");
    }
    s
}
