use std::collections::BTreeMap;
use std::time::Instant;

use mweica::eval::{amari_index, match_sources, rank_methods};
use mweica::harness::{
    format_value, mix, random_mixing_matrix, synth_sources, write_csv_records, write_csv_table,
    SourceKind,
};
use mweica::ica::UnmixingResult;
use mweica::independence::independence_index;
use rayon::prelude::*;

use crate::args::{BenchArgs, IndexArgs, Method, MixArgs, UnmixArgs};
use crate::error::{input, CliError, Result};
use crate::media::{load_inputs, save_medium, save_table, Medium};
use crate::methods::{record_diagnostics, run, Resolved};
use crate::output::{Meta, Staging};

/// Seeds of the source draw and the mixing matrix for a base seed; kept
/// apart so the two never share a generator stream.
pub fn trial_seeds(seed: u64) -> (u64, u64) {
    (seed, seed.wrapping_add(1 << 32))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn cmd_mix(args: &MixArgs) -> Result<String> {
    let mut staging = Staging::new(&args.out)?;
    let mut meta = Meta::new("mix");
    let (source_seed, mixing_seed) = trial_seeds(args.seed);
    meta.set("seed", args.seed);

    let (sources, medium) = match args.source {
        Some(kind) => {
            let kind = SourceKind::from(kind);
            meta.set("source", kind.name());
            meta.set("source_seed", source_seed);
            let bundle = synth_sources(kind, args.samples, args.dim, source_seed)?;
            (bundle.data, Medium::Csv)
        }
        None => {
            let loaded = load_inputs(&args.inputs)?;
            loaded.describe(&mut meta, "input");
            (loaded.data, loaded.medium)
        }
    };
    let d = sources.ndims();
    if d < 2 {
        return Err(input(format!("mixing needs at least 2 sources, got {d}")));
    }
    let spec = random_mixing_matrix(d, mixing_seed, args.condition_bound)?;
    let mixed = mix(&sources, &spec)?;
    meta.set("mixing_seed", mixing_seed);
    meta.set_f64("condition_bound", args.condition_bound);
    meta.set_f64("condition_number", spec.condition_number);
    meta.set("samples", sources.nsamples());
    meta.set("dim", d);

    let rows = spec.matrix.row_iter().map(|r| r.iter().cloned().collect::<Vec<_>>());
    write_csv_table(staging.file("A.csv"), None, rows)?;
    save_table(&mut staging, "mixed.csv", &mixed, "mixed")?;
    save_table(&mut staging, "sources.csv", &sources, "source")?;
    if let Some(scale) = save_medium(&mut staging, "mixed", &mixed, medium, None)? {
        meta.set_f64("wav_scale", scale);
    }
    meta.write(&staging.file("meta.txt"))?;
    staging.commit()?;
    Ok(format!(
        "mixed {d} sources of {} samples, condition number {:.3}",
        sources.nsamples(),
        spec.condition_number
    ))
}

pub fn cmd_unmix(args: &UnmixArgs) -> Result<String> {
    let mut staging = Staging::new(&args.out)?;
    let mut meta = Meta::new("unmix");
    let loaded = load_inputs(&args.inputs)?;
    loaded.describe(&mut meta, "input");
    let x = &loaded.data;
    let reference = if args.reference.is_empty() {
        None
    } else {
        let r = load_inputs(&args.reference)?;
        if r.data.nsamples() != x.nsamples() || r.data.ndims() != x.ndims() {
            return Err(input(format!(
                "reference is {}x{}, input is {}x{}",
                r.data.nsamples(),
                r.data.ndims(),
                x.nsamples(),
                x.ndims()
            )));
        }
        r.describe(&mut meta, "reference");
        Some(r)
    };

    let opts = Resolved::new(args.method, &args.solver, args.seed, x.nsamples());
    meta.set("method", args.method.name());
    opts.record(&mut meta);
    meta.set("samples", x.nsamples());
    meta.set("dim", x.ndims());
    let result = run(args.method, x, &opts)?;
    record_diagnostics(&mut meta, &result);

    let w_rows = result.unmixing.row_iter().map(|r| r.iter().cloned().collect::<Vec<_>>());
    write_csv_table(staging.file("W.csv"), None, w_rows)?;
    save_table(&mut staging, "sources.csv", &result.sources, "source")?;

    let mut summary = format!(
        "{}: residual {}, {} sweeps, converged {}",
        args.method.name(),
        format_value(result.residual),
        result.diagnostics.sweeps_used,
        result.diagnostics.converged
    );
    let matched = match &reference {
        Some(r) => {
            let report = match_sources(&result.sources, &r.data)?;
            let rows = report.permutation.iter().enumerate().map(|(i, &j)| {
                vec![i.to_string(), j.to_string(), format_value(report.congruences[(i, j)])]
            });
            let cols = header(&["estimated", "reference", "congruence"]);
            write_csv_records(staging.file("match.csv"), Some(&cols), rows)?;
            meta.set_f64("tucker_mean", report.mean_abs_congruence);
            summary.push_str(&format!(", matched |Tucker| {:.4}", report.mean_abs_congruence));
            Some(report.permutation.iter().map(|&j| r.data.column(j)).collect())
        }
        None => None,
    };
    if let Some(scale) = save_medium(&mut staging, "source", &result.sources, loaded.medium, matched)? {
        meta.set_f64("wav_scale", scale);
    }
    meta.write(&staging.file("meta.txt"))?;
    staging.commit()?;
    Ok(summary)
}

pub fn cmd_index(args: &IndexArgs) -> Result<String> {
    let mut staging = Staging::new(&args.out)?;
    let mut meta = Meta::new("index");
    let loaded = load_inputs(&args.inputs)?;
    loaded.describe(&mut meta, "input");
    meta.set("n_weights", args.n_weights);
    meta.set("seed", args.seed);
    let report = independence_index(&loaded.data, args.n_weights, args.seed)?;
    meta.set_f64("index", report.index);
    meta.set("n_used", report.n_used);

    let rows = report
        .rows
        .iter()
        .zip(&report.per_point)
        .map(|(r, v)| vec![r.to_string(), format_value(*v)]);
    write_csv_records(staging.file("per_point.csv"), Some(&header(&["row", "diag_error"])), rows)?;
    meta.write(&staging.file("meta.txt"))?;
    staging.commit()?;
    Ok(format!("index={}", format_value(report.index)))
}

struct MethodOutcome {
    tucker: f64,
    amari: f64,
    result: UnmixingResult,
    unmix_s: f64,
    score_s: f64,
}

struct Trial {
    samples: usize,
    index: usize,
    source_seed: u64,
    mixing_seed: u64,
    synth_s: f64,
    mix_s: f64,
    methods: Vec<MethodOutcome>,
}

fn run_trial(args: &BenchArgs, samples: usize, index: usize) -> Result<Trial> {
    let (source_seed, mixing_seed) = trial_seeds(args.seed.wrapping_add(index as u64));
    let clock = Instant::now();
    let truth = synth_sources(args.source.into(), samples, args.dim, source_seed)?.data;
    let synth_s = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let spec = random_mixing_matrix(args.dim, mixing_seed, args.condition_bound)?;
    let x = mix(&truth, &spec)?;
    let mix_s = clock.elapsed().as_secs_f64();

    let methods = args
        .methods
        .iter()
        .map(|&method| {
            let opts = Resolved::new(method, &args.solver, source_seed, samples);
            let clock = Instant::now();
            let result = run(method, &x, &opts)?;
            let unmix_s = clock.elapsed().as_secs_f64();
            let clock = Instant::now();
            let tucker = match_sources(&result.sources, &truth)?.mean_abs_congruence;
            let amari = amari_index(&result.unmixing, &spec.matrix)?;
            let score_s = clock.elapsed().as_secs_f64();
            Ok(MethodOutcome {
                tucker,
                amari,
                result,
                unmix_s,
                score_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trial {
        samples,
        index,
        source_seed,
        mixing_seed,
        synth_s,
        mix_s,
        methods,
    })
}

fn unique_methods(methods: &[Method]) -> Result<()> {
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(input(format!("method {} listed twice", m.name())));
        }
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String> {
    if args.trials == 0 || args.methods.is_empty() || args.samples.is_empty() {
        return Err(input("bench needs at least one trial, method and sample size"));
    }
    unique_methods(&args.methods)?;
    let mut staging = Staging::new(&args.out)?;
    let mut meta = Meta::new("bench");
    let names: Vec<&str> = args.methods.iter().map(|m| m.name()).collect();
    meta.set("methods", names.join(","));
    meta.set("trials", args.trials);
    meta.set("source", SourceKind::from(args.source).name());
    meta.set("dim", args.dim);
    let sizes: Vec<String> = args.samples.iter().map(usize::to_string).collect();
    meta.set("samples", sizes.join(","));
    meta.set("seed", args.seed);
    meta.set_f64("condition_bound", args.condition_bound);
    meta.set("n_weights", args.solver.n_weights.map_or("default".into(), |n| n.to_string()));
    meta.set("tol", args.solver.tol.map_or("default".into(), format_value));
    meta.set("max_sweeps", args.solver.max_sweeps.map_or("default".into(), |n| n.to_string()));
    meta.set("jobs", args.jobs);

    let plan: Vec<(usize, usize)> = args
        .samples
        .iter()
        .flat_map(|&k| (0..args.trials).map(move |t| (k, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| input(format!("cannot start worker threads: {e}")))?;
    // Collecting an indexed parallel iterator keeps plan order.
    let trials: Vec<Trial> = pool.install(|| {
        plan.par_iter()
            .map(|&(k, t)| run_trial(args, k, t))
            .collect::<Result<Vec<_>>>()
    })?;

    let score_rows = trials.iter().flat_map(|t| {
        t.methods.iter().zip(&names).map(move |(m, name)| {
            vec![
                t.samples.to_string(),
                t.index.to_string(),
                t.source_seed.to_string(),
                t.mixing_seed.to_string(),
                name.to_string(),
                format_value(m.tucker),
                format_value(m.amari),
                format_value(m.result.residual),
                m.result.diagnostics.converged.to_string(),
                m.result.diagnostics.sweeps_used.to_string(),
            ]
        })
    });
    let cols = header(&[
        "samples", "trial", "source_seed", "mixing_seed", "method", "tucker", "amari", "residual",
        "converged", "sweeps",
    ]);
    write_csv_records(staging.file("scores.csv"), Some(&cols), score_rows)?;

    let mut rank_rows = Vec::new();
    let mut summary = String::new();
    for &k in &args.samples {
        let mut scores: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for t in trials.iter().filter(|t| t.samples == k) {
            for (m, name) in t.methods.iter().zip(&names) {
                scores.entry(name.to_string()).or_default().push(m.tucker);
            }
        }
        let table = rank_methods(&scores).map_err(CliError::from)?;
        for (method, s) in table.methods.iter().zip(&table.summaries) {
            rank_rows.push(vec![
                k.to_string(),
                method.clone(),
                format_value(s.min),
                format_value(s.q1),
                format_value(s.median),
                format_value(s.q3),
                format_value(s.max),
                format_value(s.mean),
            ]);
            summary.push_str(&format!("k={k} {method}: median rank {}\n", s.median));
        }
    }
    let cols = header(&["samples", "method", "min", "q1", "median", "q3", "max", "mean"]);
    write_csv_records(staging.file("ranks.csv"), Some(&cols), rank_rows)?;

    let timing_rows = trials.iter().flat_map(|t| {
        t.methods.iter().zip(&names).map(move |(m, name)| {
            vec![
                t.samples.to_string(),
                t.index.to_string(),
                name.to_string(),
                format_value(t.synth_s),
                format_value(t.mix_s),
                format_value(m.unmix_s),
                format_value(m.score_s),
            ]
        })
    });
    let cols = header(&["samples", "trial", "method", "synth_s", "mix_s", "unmix_s", "score_s"]);
    write_csv_records(staging.file("timing.csv"), Some(&cols), timing_rows)?;

    meta.write(&staging.file("meta.txt"))?;
    staging.commit()?;
    Ok(summary.trim_end().to_string())
}
