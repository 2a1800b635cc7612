use std::fs;
use std::io::Write;

use vimbench_core::io::write_json;
use vimbench_core::linker::LinkConfig;
use vimbench_core::report::Aggregation;
use vimbench_core::Error;

use crate::args::{Cli, Command, Format};
use crate::error::{CliError, CliResult};
use crate::{cmd_augment, cmd_composite, cmd_evaluate, cmd_link, cmd_validate, AugmentMode, EvaluateOptions};

fn emit<T: serde::Serialize>(out: &mut dyn Write, format: Format, table: impl FnOnce() -> String, json: &T) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Internal(format!("writing output: {e}"));
    if matches!(format, Format::Table | Format::Both) {
        write!(out, "{}", table()).map_err(io)?;
    }
    if matches!(format, Format::Json | Format::Both) {
        let text = serde_json::to_string_pretty(json).map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(out, "{text}").map_err(io)?;
    }
    Ok(())
}

/// Executes one parsed command line, writing reports to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Evaluate(a) => {
            let opts = EvaluateOptions {
                config: a.metrics.config(),
                aggregation: if a.pool { Aggregation::Pooled } else { Aggregation::Mean },
                video_matting: a.video_matting,
            };
            let report = cmd_evaluate(&a.pred_root, &a.gt_root, &opts)?;
            if let Some(path) = &a.json_out {
                write_json(&report, path)?;
            }
            emit(out, a.format, || report.render_table(), &report)
        }
        Command::Composite(a) => {
            let manifests = cmd_composite(&a.spec, &a.out_root, a.seed)?;
            for m in &manifests {
                writeln!(
                    out,
                    "{}: {} frames {}x{}, {} instances",
                    m.clip_id,
                    m.frame_count,
                    m.width,
                    m.height,
                    m.gt_instances.len()
                )
                .map_err(|e| CliError::Internal(e.to_string()))?;
            }
            Ok(())
        }
        Command::Validate(a) => {
            let reports = cmd_validate(&a.clip_root, a.tolerance)?;
            let table = || {
                let mut s = String::new();
                for r in &reports {
                    let status = if r.passed() { "PASS" } else { "FAIL" };
                    s += &format!("{status} {} max residual {:.6} (tolerance {:.6})", r.clip_id, r.max_residual, r.tolerance);
                    if !r.passed() {
                        s += &format!(" failing frames {:?}", r.failing_frames);
                    }
                    s.push('\n');
                }
                s
            };
            emit(out, a.format, table, &reports)?;
            if reports.iter().all(|r| r.passed()) {
                Ok(())
            } else {
                let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.clip_id.as_str()).collect();
                Err(CliError::Validation(format!("residual above tolerance in {failed:?}")))
            }
        }
        Command::Augment(a) => {
            let mode = match (&a.config, a.salt_pepper) {
                (_, Some(f)) => AugmentMode::SaltPepper(f),
                (Some(path), None) => AugmentMode::Config(
                    fs::read_to_string(path).map_err(|e| CliError::Layout(Error::Io { path: path.clone(), source: e }))?,
                ),
                (None, None) => {
                    return Err(CliError::Layout(Error::InvalidConfig(
                        "augment needs --config or --salt-pepper".into(),
                    )))
                }
            };
            cmd_augment(&a.input, &a.output, &mode, a.seed)
        }
        Command::Link(a) => {
            let cfg = LinkConfig {
                min_area: a.min_area,
                binarize_threshold: a.binarize_threshold,
            };
            let m = cmd_link(&a.input, &a.output, &cfg)?;
            writeln!(out, "{}: {} tracks", m.clip_id, m.gt_instances.len()).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}
