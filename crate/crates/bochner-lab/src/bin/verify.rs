//! Command-line entry point: runs verification suites from flags or a JSON
//! config file (flags override the file), writes the report, and returns
//! CI-friendly exit codes: 0 all green, 1 any failure, 2 configuration error.

use std::process::ExitCode;

use bochner_lab::metric::MetricKind;
use bochner_lab::suite::{run_suite, Suite, SuiteConfig};

const USAGE: &str = "usage: verify [options]
  --config PATH       JSON config file; flags below override its fields
  --suite NAME        jets | curvature | identities | spinors | stern | all
  --trials N          random trials per case (default 100)
  --seed N            base seed (default 7)
  --dims LIST         comma-separated dimensions from {3,4,5}
  --s LIST            comma-separated slicing depths to include
  --metric LIST       conformal | warped | perturbed (comma-separated)
  --tolerance X       relative tolerance override for equality checks
  --epsilon X         torus metric perturbation amplitude (default 0.05)
  --grid N            torus resolution, 16..=96 (default 48)
  --levels N          level-set count for the coarea average (default 32)
  --out PATH          write the JSON report here instead of stdout";

fn fail(key: &str, reason: &str) -> ExitCode {
    eprintln!("configuration error: `{key}`: {reason}");
    eprintln!("{USAGE}");
    ExitCode::from(2)
}

fn parse_list<T: std::str::FromStr>(raw: &str) -> Result<Vec<T>, String> {
    raw.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| x.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|bad| format!("cannot parse `{bad}`"))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = SuiteConfig::default();

    // first pass: load a config file if given
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            let Some(path) = args.get(i + 1) else {
                return fail("config", "missing path");
            };
            match std::fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()))
            {
                Ok(parsed) => config = parsed,
                Err(e) => return fail("config", &e),
            }
        }
        i += 1;
    }

    let mut i = 0;
    while i < args.len() {
        let flag = args[i].as_str();
        if flag == "--help" || flag == "-h" {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        let Some(value) = args.get(i + 1) else {
            return fail(flag.trim_start_matches('-'), "missing value");
        };
        let result: Result<(), String> = match flag {
            "--config" => Ok(()),
            "--suite" => Suite::parse(value)
                .map(|s| config.suite = s)
                .map_err(|e| e.to_string()),
            "--trials" => value
                .parse()
                .map(|v| config.trials = v)
                .map_err(|e| e.to_string()),
            "--seed" => value
                .parse()
                .map(|v| config.seed = v)
                .map_err(|e| e.to_string()),
            "--dims" => parse_list(value).map(|v| config.dims = v),
            "--s" => parse_list(value).map(|v| config.s_values = Some(v)),
            "--metric" => value
                .split(',')
                .map(|m| MetricKind::parse(m.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map(|v| config.metrics = v)
                .map_err(|e| e.to_string()),
            "--tolerance" => value
                .parse()
                .map(|v| config.tolerance = Some(v))
                .map_err(|e| e.to_string()),
            "--epsilon" => value
                .parse()
                .map(|v| config.epsilon = v)
                .map_err(|e| e.to_string()),
            "--grid" => value
                .parse()
                .map(|v| config.grid = v)
                .map_err(|e| e.to_string()),
            "--levels" => value
                .parse()
                .map(|v| config.levels = v)
                .map_err(|e| e.to_string()),
            "--out" => {
                config.out = Some(value.into());
                Ok(())
            }
            unknown => return fail(unknown.trim_start_matches('-'), "unknown flag"),
        };
        if let Err(e) = result {
            return fail(flag.trim_start_matches('-'), &e);
        }
        i += 2;
    }

    if let Err(e) = config.validate() {
        eprintln!("configuration error: {e}");
        return ExitCode::from(2);
    }

    let report = match run_suite(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("suite failed to run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let body = match report.to_json() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot serialize report: {e}");
            return ExitCode::FAILURE;
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("cannot write report to {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
            eprintln!(
                "{} checks, {} passed, {} failed -> {}",
                report.summary.total,
                report.summary.passed,
                report.summary.failed,
                path.display()
            );
        }
        None => println!("{body}"),
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
