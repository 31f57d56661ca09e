use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spc_caching::analysis::{self, comparison_table};
use spc_caching::format::{self, import_scheme, render_csv, render_table, with_memshare};
use spc_caching::par::Execution;
use spc_caching::simulator::{DemandSweep, Simulator};
use spc_caching::{
    build_mn_scheme, build_proposed_scheme, delivery, enumerate_codewords, make_corpus,
    verify_schedule, CachingScheme, DemandVector, Rational, ResolvableDesign, SchemeParams,
};

use crate::{CompareArgs, ConstructArgs, Kind, ScheduleArgs, SimulateArgs, OUT_DIR_ENV};

pub enum CliError {
    Invalid(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Verification(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<spc_caching::Error> for CliError {
    fn from(e: spc_caching::Error) -> Self {
        match e {
            spc_caching::Error::Malformed(_) => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn resolve_output(path: PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path,
    }
}

fn rate_decimal(r: Rational) -> String {
    format::short_decimal(r)
}

fn summary(scheme: &CachingScheme) -> String {
    format!(
        "K={} F_s={} M/N={} R={}",
        scheme.users(),
        scheme.subpacketization(),
        scheme.cache_ratio(),
        rate_decimal(scheme.nominal_rate())
    )
}

pub fn construct(a: ConstructArgs) -> CliResult {
    let (scheme, default_name) = match a.kind {
        Kind::Proposed => {
            let (q, k) = match (a.q, a.k) {
                (Some(q), Some(k)) => (q, k),
                _ => return Err(CliError::Invalid("proposed scheme needs --q and --k".into())),
            };
            let design = ResolvableDesign::build(enumerate_codewords(SchemeParams::new(q, k)?));
            (
                build_proposed_scheme(&design, a.files)?,
                format!("proposed-q{q}-k{k}.json"),
            )
        }
        Kind::Mn => {
            let (users, ratio) = match (a.users, a.ratio.as_deref()) {
                (Some(u), Some(r)) => (u, r),
                _ => return Err(CliError::Invalid("mn scheme needs --K and --ratio".into())),
            };
            let ratio = Rational::from_str(ratio)
                .map_err(|_| CliError::Invalid(format!("cannot parse ratio {ratio:?}")))?;
            (
                build_mn_scheme(users, ratio, a.files)?,
                format!("mn-K{users}-{}-{}.json", ratio.numer(), ratio.denom()),
            )
        }
    };
    let path = resolve_output(a.output.unwrap_or_else(|| PathBuf::from(default_name)));
    fs::write(&path, format::export_scheme(&scheme)).map_err(|e| io_err(&path, e))?;
    println!("{}", summary(&scheme));
    println!("wrote {}", path.display());
    Ok(())
}

fn load(path: &Path) -> Result<format::LoadedScheme, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    import_scheme(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn schedule(a: ScheduleArgs) -> CliResult {
    let loaded = load(&a.scheme)?;
    let sched = delivery::schedule_for(&loaded.scheme, loaded.design.as_ref())?;
    print!("{}", sched.render(&loaded.scheme));
    println!("equations={} rate={}", sched.len(), sched.rate());
    Ok(())
}

fn parse_demands(line: &str, users: usize, files: usize) -> Result<DemandVector, CliError> {
    let bad = || CliError::Invalid(format!("cannot parse demand vector {line:?}"));
    let values = line
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != users {
        return Err(CliError::Invalid(format!(
            "demand vector has {} entries, scheme has {users} users",
            values.len()
        )));
    }
    if values.contains(&0) {
        return Err(CliError::Invalid("demands are 1-based file indices".into()));
    }
    Ok(DemandVector::new(values.into_iter().map(|d| d - 1).collect(), files)?)
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let loaded = load(&a.scheme)?;
    let files = a.files.unwrap_or(loaded.scheme.file_count());
    let scheme = loaded.scheme.with_file_count(files)?;
    let users = scheme.users();
    let corpus = make_corpus(files, a.file_size, a.seed, scheme.subpacketization())?;
    let sim = Simulator::new(&scheme, loaded.design.as_ref(), &corpus)?;

    let coverage = verify_schedule(&scheme, sim.schedule());
    println!(
        "scheme={} K={} F_s={} N={} F={} seed={}",
        scheme.kind().as_str(),
        users,
        scheme.subpacketization(),
        files,
        a.file_size,
        a.seed
    );

    let sweep = if a.exhaustive {
        DemandSweep::Exhaustive
    } else if let Some(count) = a.random {
        DemandSweep::Random {
            count,
            seed: a.demand_seed.unwrap_or(a.seed),
        }
    } else if let Some(path) = &a.demands_file {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let list = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| parse_demands(l, users, files))
            .collect::<Result<Vec<_>, _>>()?;
        DemandSweep::Listed(list)
    } else {
        let single = match &a.demands {
            Some(line) => parse_demands(line, users, files)?,
            None => DemandVector::nth(0, users, files),
        };
        let run = sim.run(&single)?;
        let line: Vec<String> = single.as_slice().iter().map(|d| (d + 1).to_string()).collect();
        println!("demands={}", line.join(","));
        println!(
            "runs=1 errors={} rate={} transmitted_bytes={} transmissions={}",
            run.error_count,
            run.measured_rate,
            run.transmitted_bytes,
            run.transmissions.len()
        );
        if a.hex {
            for (i, hex) in run.transmission_hex().iter().enumerate() {
                println!("tx[{i}]={hex}");
            }
        }
        return finish(coverage.all_ok(), run.error_count);
    };

    let summary = sim.sweep(&sweep, Execution::default())?;
    let rates: Vec<String> = summary.rates.iter().map(ToString::to_string).collect();
    println!(
        "runs={} failed_runs={} errors={} rate={} transmitted_bytes={} uniform_transmissions={}",
        summary.runs,
        summary.failed.len(),
        summary.user_errors,
        rates.join("|"),
        summary.transmitted_bytes,
        summary.uniform_transmissions
    );
    for d in summary.failed.iter().take(10) {
        let line: Vec<String> = d.as_slice().iter().map(|d| (d + 1).to_string()).collect();
        println!("failed demands={}", line.join(","));
    }
    finish(coverage.all_ok() && summary.uniform_transmissions, summary.user_errors)
}

fn finish(coverage_ok: bool, errors: usize) -> CliResult {
    println!("coverage={}", if coverage_ok { "ok" } else { "FAILED" });
    if !coverage_ok || errors > 0 {
        return Err(CliError::Verification(format!(
            "verification failed: {errors} decoding errors, coverage {}",
            if coverage_ok { "ok" } else { "broken" }
        )));
    }
    Ok(())
}

pub fn compare(a: CompareArgs) -> CliResult {
    let k_min = if a.k_max < a.k_min { a.k_max } else { a.k_min };
    let rows = comparison_table(a.q, k_min..=a.k_max)?;
    let rows = with_memshare(rows, a.memshare);
    if a.csv {
        print!("{}", render_csv(&rows, a.memshare));
    } else {
        print!("{}", render_table(&rows, a.memshare));
        if a.memshare && a.q == 2 {
            for r in rows.iter().filter(|r| r.memshare.is_some()) {
                let c = analysis::memshare_comparison(r.cmp.k)?;
                println!(
                    "k={} memshare exponent (1/k)log2(F_ms/F*) = {:.4}",
                    r.cmp.k, c.exponent
                );
            }
        }
    }
    Ok(())
}
