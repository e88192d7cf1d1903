mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use poledyn::experiments::{
    conjugacy_check, density_estimate, disjointness_sweep, hitting_scaling_study, logsq_conjecture_probe,
    uniform_sample, unit_draw,
};
use poledyn::map::{default_bits, MapFile};
use poledyn::orbit::{first_hit, iterate};
use poledyn::pullback::{glasser_measure_check, pullback_with_budget, summarize_levels};
use poledyn::report;
use poledyn::scalar::parse_exact;
use poledyn::{
    BigFloat, ConjugacyConfig, DisjointnessConfig, Error, ExperimentConfig, IntervalSet, MapDef, MapSpec,
    PrecisionPolicy, Rational, Real,
};

use args::{Cli, Command, Common, Mode};

/// A failure with its process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PrecisionExhausted(_) | Error::BracketFailure { .. } => 3,
            Error::BudgetExceeded { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

#[derive(Serialize)]
struct PlotHint {
    data: String,
    kind: &'static str,
    x: &'static str,
    y: &'static str,
    title: String,
}

/// Collects written files and plot hints for the manifest.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
    plots: Vec<PlotHint>,
}

impl Output {
    fn new(dir: &Path) -> Outcome<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            plots: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Outcome {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Outcome {
        let text = serde_json::to_string_pretty(value).expect("json value serializes");
        self.write(name, &(text + "\n"))
    }

    fn plot(&mut self, data: &str, kind: &'static str, x: &'static str, y: &'static str, title: impl Into<String>) {
        self.plots.push(PlotHint {
            data: data.to_string(),
            kind,
            x,
            y,
            title: title.into(),
        });
    }
}

fn load_map(path: &Path) -> Outcome<MapDef> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read map file {}: {e}", path.display())))?;
    MapDef::from_json(&text).map_err(|e| invalid(format!("map file {}: {e}", path.display())))
}

fn parse<T: Real>(spec: &MapSpec<T>, text: &str, what: &str) -> Outcome<T> {
    let q = parse_exact(text).map_err(|e| invalid(format!("{what} {text:?}: {e}")))?;
    Ok(spec.scalar(&q))
}

fn policy(common: &Common, default: u32) -> Outcome<PrecisionPolicy> {
    let mut p = match common.mode {
        Mode::Bigfloat => PrecisionPolicy::big_float(common.bits.unwrap_or(default))?,
        Mode::Rational => PrecisionPolicy::exact(),
    };
    p.shadow = !common.no_shadow;
    p.shadow_margin_bits = common.shadow_margin;
    p.shadow_agreement_tol = common.shadow_tol;
    p.validate()?;
    Ok(p)
}

fn orbit_files<T: Real>(def: &MapDef, x0: &str, n: usize, p: &PrecisionPolicy, out: &mut Output) -> Outcome {
    let spec: MapSpec<T> = def.instantiate(p.bits())?;
    let start = parse(&spec, x0, "x0")?;
    let orbit = iterate(&spec, &start, n, p)?;
    out.write("orbit.csv", &report::orbit_csv(&orbit))?;
    out.json("orbit.json", &report::orbit_json(&orbit))?;
    out.plot("orbit.csv", "line", "step", "value", format!("orbit of {x0}"));
    if let Some(hit) = orbit.pole_hit {
        return Err(invalid(format!(
            "iterate {} landed exactly on pole {}; truncated orbit written",
            hit.step, hit.pole_index
        )));
    }
    Ok(())
}

fn hit_files<T: Real>(def: &MapDef, x0: &str, eps: &str, n_max: usize, p: &PrecisionPolicy, out: &mut Output) -> Outcome {
    let spec: MapSpec<T> = def.instantiate(p.bits())?;
    let record = first_hit(&spec, &parse(&spec, x0, "x0")?, &parse(&spec, eps, "eps")?, n_max, p)?;
    out.json("hit.json", &report::hit_json(&record))
}

fn pullback_files<T: Real>(def: &MapDef, eps: &str, k: usize, budget: usize, p: &PrecisionPolicy, out: &mut Output) -> Outcome {
    let spec: MapSpec<T> = def.instantiate(p.bits())?;
    let e = parse(&spec, eps, "eps")?;
    let levels = pullback_with_budget(&spec, &e, k, p, budget)?;
    out.write("pullback.csv", &report::pullback_csv(&levels))?;
    out.json("pullback.json", &report::pullback_json(&spec, &e, &levels))?;
    let summary = summarize_levels(&spec, &levels);
    let mut csv = String::from("k,intervals,measure,radius,containment_ratio\n");
    for s in &summary {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            s.k,
            s.intervals,
            s.measure,
            s.radius.clone().unwrap_or_default(),
            s.containment_ratio.map(|r| r.to_string()).unwrap_or_default()
        ));
    }
    out.write("levels.csv", &csv)?;
    out.plot("pullback.csv", "segments", "a", "level", "hitting sets I_k");
    out.plot("levels.csv", "line", "k", "containment_ratio", "R_k / sqrt(k)");
    Ok(())
}

fn glasser_sets(sets: &[String], random: usize, seed: u64) -> Outcome<Vec<Vec<(String, String)>>> {
    if !sets.is_empty() {
        let pairs = sets
            .iter()
            .map(|s| {
                let (a, b) = s
                    .split_once(',')
                    .ok_or_else(|| invalid(format!("--set {s:?} must look like a,b")))?;
                Ok((a.trim().to_string(), b.trim().to_string()))
            })
            .collect::<Outcome<Vec<_>>>()?;
        return Ok(vec![pairs]);
    }
    Ok((0..random)
        .map(|s| {
            let count = 1 + (unit_draw(seed, s, 0) * 4.0) as usize;
            let mut ends: Vec<f64> = (1..=2 * count)
                .map(|j| uniform_sample(seed, s, j, -20.0, 20.0).to_f64())
                .collect();
            ends.sort_by(f64::total_cmp);
            ends.chunks(2).map(|c| (c[0].to_string(), c[1].to_string())).collect()
        })
        .collect())
}

fn glasser_files(def: &MapDef, sets: &[String], random: usize, common: &Common, out: &mut Output) -> Outcome {
    let p = policy(common, 256)?;
    if p.is_exact() {
        return Err(invalid("glasser runs in bigfloat mode"));
    }
    let spec: MapSpec<BigFloat> = def.instantiate(p.bits())?;
    let mut csv = String::from("set,intervals,measure,preimage_measure,discrepancy\n");
    let mut rows = Vec::new();
    for (i, pairs) in glasser_sets(sets, random, common.seed)?.iter().enumerate() {
        let scalars = pairs
            .iter()
            .map(|(a, b)| Ok((parse(&spec, a, "set")?, parse(&spec, b, "set")?)))
            .collect::<Outcome<Vec<_>>>()?;
        let set = IntervalSet::from_pairs(scalars)?;
        let d = glasser_measure_check(&spec, &set, &p)?;
        let pre = set.measure().clone() + d.clone();
        csv.push_str(&format!(
            "{i},{},{},{},{}\n",
            set.len(),
            set.measure().to_decimal(),
            pre.to_decimal(),
            d.to_decimal()
        ));
        rows.push(json!({
            "set": i,
            "intervals": pairs,
            "measure": set.measure().to_decimal(),
            "discrepancy": d.to_decimal(),
        }));
    }
    out.write("glasser.csv", &csv)?;
    out.json("glasser.json", &json!({ "bits": p.bits(), "sets": rows }))?;
    out.plot("glasser.csv", "scatter", "measure", "discrepancy", "measure discrepancy per set");
    Ok(())
}

fn experiment_config(def: MapDef, values: &[String], samples: usize, c1: &str, max_bits: u32, common: &Common) -> Outcome<ExperimentConfig> {
    let mut config = ExperimentConfig::new(def, common.seed, samples, &[]);
    config.values = values.to_vec();
    config.c1 = c1.to_string();
    config.policy = policy(common, 256)?;
    config.max_bits = max_bits;
    Ok(config)
}

fn run(command: &Command) -> Outcome<Output> {
    let common = command.common();
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| invalid(format!("--threads: {e}")))?;
    }
    let mut out = Output::new(&common.out)?;
    match command {
        Command::Orbit { map, x0, n, common } => {
            let def = load_map(&map.map)?;
            let p = policy(common, default_bits(*n))?;
            match common.mode {
                Mode::Bigfloat => orbit_files::<BigFloat>(&def, x0, *n, &p, &mut out)?,
                Mode::Rational => orbit_files::<Rational>(&def, x0, *n, &p, &mut out)?,
            }
        }
        Command::Hit { map, x0, eps, n_max, common } => {
            let def = load_map(&map.map)?;
            let p = policy(common, default_bits(*n_max))?;
            match common.mode {
                Mode::Bigfloat => hit_files::<BigFloat>(&def, x0, eps, *n_max, &p, &mut out)?,
                Mode::Rational => hit_files::<Rational>(&def, x0, eps, *n_max, &p, &mut out)?,
            }
        }
        Command::Pullback { map, eps, k, budget, common } => {
            let def = load_map(&map.map)?;
            let p = policy(common, 256)?;
            match common.mode {
                Mode::Bigfloat => pullback_files::<BigFloat>(&def, eps, *k, *budget, &p, &mut out)?,
                Mode::Rational => pullback_files::<Rational>(&def, eps, *k, *budget, &p, &mut out)?,
            }
        }
        Command::Glasser { map, sets, random_sets, common } => {
            glasser_files(&load_map(&map.map)?, sets, *random_sets, common, &mut out)?;
        }
        Command::Density { map, y, samples, c1, max_bits, common } => {
            let config = experiment_config(load_map(&map.map)?, y, *samples, c1, *max_bits, common)?;
            let r = density_estimate(&config)?;
            out.write("density.json", &(r.payload_json() + "\n"))?;
            out.write("density.csv", &r.to_csv()?)?;
            out.plot("density.csv", "errorbar", "y", "fraction", "density of X with Wilson 95% interval");
        }
        Command::ProbeLogsq { map, y, samples, max_bits, common } => {
            let config = experiment_config(load_map(&map.map)?, y, *samples, "1", *max_bits, common)?;
            let r = logsq_conjecture_probe(&config)?;
            out.write("probe-logsq.json", &(r.payload_json() + "\n"))?;
            out.write("probe-logsq.csv", &r.to_csv()?)?;
            out.plot("probe-logsq.csv", "errorbar", "y", "fraction", "hits within x (ln x)^2 steps");
        }
        Command::Scaling { map, x0, max_bits, common } => {
            let config = experiment_config(load_map(&map.map)?, x0, 1, "1", *max_bits, common)?;
            let r = hitting_scaling_study(&config)?;
            out.write("scaling.json", &(r.payload_json() + "\n"))?;
            out.write("scaling.csv", &r.to_csv()?)?;
            out.plot("scaling.csv", "loglog", "x0", "steps", "steps to the pole region");
        }
        Command::Disjoint { map, eps, k_max, common } => {
            let config = DisjointnessConfig {
                map: load_map(&map.map)?,
                eps: eps.clone(),
                k_max: *k_max,
                policy: policy(common, 256)?,
            };
            let r = disjointness_sweep(&config)?;
            out.write("disjoint.json", &(r.payload_json() + "\n"))?;
            out.write("disjoint.csv", &r.to_csv()?)?;
            for (i, m) in r.summary.matrices.iter().enumerate() {
                let bools: Vec<Vec<bool>> = m.iter().map(|row| row.iter().map(|&d| d == 1).collect()).collect();
                let name = format!("disjoint_matrix_{i}.csv");
                out.write(&name, &report::matrix_csv(&bools))?;
                out.plot(&name, "heatmap", "k", "l", format!("disjointness at eps = {}", eps[i]));
            }
        }
        Command::Conjugacy { samples, steps, theta_bits, lo, hi, max_bits, common } => {
            let config = ConjugacyConfig {
                seed: common.seed,
                samples: *samples,
                lo: lo.clone(),
                hi: hi.clone(),
                steps: *steps,
                theta_bits: *theta_bits,
                policy: policy(common, default_bits(*steps))?,
                max_bits: *max_bits,
            };
            let r = conjugacy_check(&config)?;
            out.write("conjugacy.json", &(r.payload_json() + "\n"))?;
            out.write("conjugacy.csv", &r.to_csv()?)?;
            out.plot("conjugacy.csv", "histogram", "ones_fraction", "count", "1-bit frequency per seed");
        }
    }
    Ok(out)
}

fn map_echo(command: &Command) -> Value {
    let path = match command {
        Command::Orbit { map, .. }
        | Command::Hit { map, .. }
        | Command::Pullback { map, .. }
        | Command::Glasser { map, .. }
        | Command::Density { map, .. }
        | Command::Scaling { map, .. }
        | Command::Disjoint { map, .. }
        | Command::ProbeLogsq { map, .. } => &map.map,
        Command::Conjugacy { .. } => return serde_json::to_value(MapFile::from(MapDef::graham())).expect("map serializes"),
    };
    load_map(path)
        .map(|d| serde_json::to_value(MapFile::from(d)).expect("map serializes"))
        .unwrap_or(Value::Null)
}

fn write_manifest(command: &Command, out: &mut Output) -> Outcome {
    let manifest = json!({
        "tool": "poledyn",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": command.name(),
        "arguments": command,
        "map": map_echo(command),
        "outputs": out.files,
        "plots": out.plots,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(out.dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = run(&cli.command).and_then(|mut out| {
        write_manifest(&cli.command, &mut out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            eprintln!(
                "{}: wrote {} files to {} in {:.2}s",
                cli.command.name(),
                out.files.len() + 1,
                out.dir.display(),
                started.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
