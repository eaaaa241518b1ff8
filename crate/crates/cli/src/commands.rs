use std::path::Path;

use mvlsw::io::{load_bundle, load_timeseries, save_bundle, write_timeseries, LengthPolicy, LoadOptions};
use mvlsw::plot::{emit_plot, parse_info, PlotSpec};
use mvlsw::spectrum::kernels_for;
use mvlsw::{
    apx_ci, bootstrap_interval, build_eq3_fixture, coherence, make_filter, mv_ews, partial_coherence, rmvlsw,
    var_ews, AutoCorrProducts, DiscreteWaveletSystem, EstimateOptions, Family, Innovation, InnovationGenerator,
    IntervalMethod, IntervalPair, KernelName, KernelSpec, MvLswArray,
};

use crate::{
    BootstrapArgs, CiArgs, CoherenceArgs, Command, Dist, EstimateArgs, FixtureArgs, InnovationArgs, PlotArgs,
    SimulateArgs,
};

pub const THREADS_VAR: &str = "MVLSW_THREADS";

pub enum Failure {
    Usage(String),
    Domain(mvlsw::Error),
}

impl From<mvlsw::Error> for Failure {
    fn from(e: mvlsw::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Coherence(a) => coherence_cmd(a),
        Command::Ci(a) => ci(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::Plot(a) => plot(a),
        Command::Fixture(a) => fixture(a),
    }
}

fn generator(args: &InnovationArgs, seed: u64) -> Result<InnovationGenerator, Failure> {
    let dist = match args.dist {
        Dist::Gauss => Innovation::Gaussian,
        Dist::Uniform => Innovation::Uniform,
        Dist::T => Innovation::StudentT { df: args.df },
    };
    Ok(InnovationGenerator::new(dist, seed)?)
}

fn load(path: &Path) -> Result<MvLswArray, Failure> {
    Ok(load_bundle(path)?)
}

fn simulate(a: SimulateArgs) -> Outcome {
    let s = load(&a.spectrum)?;
    let x = rmvlsw(&s, &generator(&a.innovation, a.seed)?)?;
    write_timeseries(&x, &a.out)?;
    Ok(())
}

fn kernel_spec(name: &str, param: &str, t: usize) -> Result<KernelSpec, Failure> {
    let name: KernelName = name.parse().map_err(|e: mvlsw::Error| Failure::Usage(e.to_string()))?;
    let params = if param.eq_ignore_ascii_case("auto") {
        vec![(t as f64).sqrt().floor() as usize]
    } else {
        param
            .split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure::Usage(format!("--param expects an integer, a list or 'auto', got '{param}'")))?
    };
    Ok(KernelSpec { name, params })
}

fn estimate(a: EstimateArgs) -> Outcome {
    let family: Family = a.family.parse().map_err(|e: mvlsw::Error| Failure::Usage(e.to_string()))?;
    let policy: LengthPolicy = a.pad.parse().map_err(|e: mvlsw::Error| Failure::Usage(e.to_string()))?;
    let options = LoadOptions {
        columns: a.columns.clone(),
        policy,
        log_returns: a.log_returns,
    };
    let x = load_timeseries(&a.input, &options)?;
    let opts = EstimateOptions {
        family,
        filter_number: a.number,
        kernel: kernel_spec(&a.kernel, &a.param, x.len())?,
        bias_correct: a.bias_correct,
        tol: a.tol,
    };
    let s = mv_ews(&x, &opts)?;
    save_bundle(&s, &a.out)?;
    println!("channels: {}", s.meta.channel_names.join(","));
    println!("dimensions: P={} J={} T={}", s.channels(), s.levels(), s.len());
    println!("wavelet: {} {}", s.meta.family, s.meta.filter_number);
    println!("kernel: {}", opts.kernel);
    println!("bias corrected: {}", s.meta.bias_corrected);
    if let Some(g) = s.meta.gcv {
        println!("gcv: {g}");
    }
    if let Some(m) = s.meta.min_eigenvalue {
        println!("minimum eigenvalue: {m:e}");
    }
    Ok(())
}

fn coherence_cmd(a: CoherenceArgs) -> Outcome {
    let s = load(&a.input)?;
    let out = if a.partial { partial_coherence(&s)? } else { coherence(&s)? };
    save_bundle(&out, &a.out)?;
    Ok(())
}

fn ci(a: CiArgs) -> Outcome {
    let s = load(&a.input)?;
    let spec = s
        .meta
        .kernel
        .clone()
        .ok_or_else(|| Failure::Usage("bundle records no kernel; ci needs an estimated spectrum".into()))?;
    let widest = kernels_for(&spec, s.levels())?
        .iter()
        .map(|k| k.half_width())
        .max()
        .unwrap_or(0);
    let system = DiscreteWaveletSystem::new(make_filter(s.meta.family, s.meta.filter_number)?, s.levels())?;
    let acp = AutoCorrProducts::with_max_lag(&system, 2 * widest)?;
    let var = var_ews(&s, &acp, None)?;
    let iv = apx_ci(&s, &var, a.alpha)?;
    save_bundle(&iv.lower, &a.out_lower)?;
    save_bundle(&iv.upper, &a.out_upper)?;
    if let Some(path) = &a.out_variance {
        save_bundle(&var, path)?;
    }
    Ok(())
}

fn bootstrap(a: BootstrapArgs) -> Outcome {
    let s = load(&a.input)?;
    let gen = generator(&a.innovation, a.seed)?;
    let r = bootstrap_interval(&s, a.reps, a.alpha, &gen)?;
    save_bundle(&r.interval.lower, &a.out_lower)?;
    save_bundle(&r.median, &a.out_median)?;
    save_bundle(&r.interval.upper, &a.out_upper)?;
    Ok(())
}

fn plot(a: PlotArgs) -> Outcome {
    let x = load(&a.input)?;
    let mut spec = PlotSpec::new(a.style, parse_info(&a.info)?);
    spec.options.include_diag = !a.no_diag;
    spec.options.line_width = a.lwd;
    if let Some(y) = &a.ylim {
        if y[0] >= y[1] || y.iter().any(|v| !v.is_finite()) {
            return Err(Failure::Usage(format!("--ylim needs MIN < MAX, got {} {}", y[0], y[1])));
        }
        spec.options.ylim = Some((y[0], y[1]));
    }
    let interval = match &a.interval {
        Some(paths) => Some(IntervalPair {
            lower: load(&paths[0])?,
            upper: load(&paths[1])?,
            alpha: f64::NAN,
            method: IntervalMethod::Analytic,
        }),
        None => None,
    };
    let files = emit_plot(&x, &spec, interval.as_ref(), &a.out)?;
    println!("{}", files.svg.display());
    println!("{}", files.csv.display());
    Ok(())
}

fn fixture(a: FixtureArgs) -> Outcome {
    debug_assert!(a.eq3);
    let s = build_eq3_fixture(a.length)?;
    save_bundle(&s, &a.out)?;
    Ok(())
}
