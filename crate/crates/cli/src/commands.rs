use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hystcmp_core::analyses::{
    dc_sweep, default_resolution, measure_delay, measure_hysteresis, stimulus_trace, transient,
    AnalysisError, SweepCurve,
};
use hystcmp_core::analytics::{current_ratio, node_squares, transition_currents, TriodeCross};
use hystcmp_core::comparator::{build_comparator, ComparatorConfig, LatchOperatingPoint, Variant};
use hystcmp_core::device::Region;
use hystcmp_core::mna::{dc_solve, SolverOptions};
use hystcmp_core::netlist::{parse_netlist, Netlist, Pulse, SourceSpec};

use crate::error::CliError;
use crate::output::{emit, num, si, sweep_csv, waveform_csv};
use crate::{Command, Input};

const DEFAULT_SUPPLY: f64 = 3.0;

pub fn run(command: Command) -> Result<(), CliError> {
    let opts = SolverOptions::default();
    match command {
        Command::Op { input, out } => {
            let nl = load(&input)?;
            let sol = dc_solve(&nl, &opts, None)?;
            let mut text = format!("iterations={}\n", sol.iterations);
            for node in &nl.node_names()[1..] {
                let _ = writeln!(text, "v({node})={}", num(sol.node_voltages[node]));
            }
            for (name, i) in &sol.branch_currents {
                let _ = writeln!(text, "i({name})={}", num(*i));
            }
            if !sol.device_evals.is_empty() {
                let _ = writeln!(text, "{:<6} {:<10} {:>20} {:>20} {:>20}", "device", "region", "id", "gm", "gds");
            }
            for e in &nl.elements {
                if let Some(d) = sol.device(&e.name) {
                    let region = match d.region {
                        Region::Cutoff => "cutoff",
                        Region::Triode => "triode",
                        Region::Saturation => "saturation",
                    };
                    let _ = writeln!(
                        text,
                        "{:<6} {:<10} {:>20} {:>20} {:>20}",
                        e.name,
                        region,
                        num(d.id),
                        num(d.gm),
                        num(d.gds)
                    );
                }
            }
            emit(&text, out.output.as_deref())
        }
        Command::Dc {
            input,
            source,
            from,
            to,
            step,
            both,
            out,
        } => {
            let nl = load(&input)?;
            let mut text = String::new();
            if both {
                let (up, down) = sweep_pair(&nl, &source, from, to, step, &opts)?;
                sweep_csv(&up, true, true, &mut text);
                sweep_csv(&down, true, false, &mut text);
            } else {
                let curve = dc_sweep(&nl, &source, from, to, step, &opts)?;
                sweep_csv(&curve, false, true, &mut text);
            }
            emit(&text, out.output.as_deref())
        }
        Command::Tran {
            input,
            dt,
            stop,
            out,
        } => {
            let nl = load(&input)?;
            let w = transient(&nl, dt, stop, &opts)?;
            let mut text = String::new();
            waveform_csv(&w, &mut text);
            emit(&text, out.output.as_deref())
        }
        Command::Hyst {
            input,
            source,
            range,
            step,
            resolution,
            node,
            threshold,
            out,
        } => {
            if !(range > 0.0) {
                return Err(CliError::Usage("--range must be positive".into()));
            }
            let nl = load(&input)?;
            let threshold = threshold.unwrap_or(0.5 * supply(&nl));
            let resolution = resolution.unwrap_or(default_resolution(step));
            let (up, down) = sweep_pair(&nl, &source, -range, range, step, &opts)?;
            let r = measure_hysteresis(&up, &down, &node, threshold, resolution, &nl, &opts)?;
            let mut text = String::new();
            let _ = writeln!(
                text,
                "hysteresis of {node} vs {source}: threshold {}V, resolution {}A",
                si(threshold),
                si(resolution)
            );
            let _ = writeln!(text, "  up transition    {}A", si(r.i_t1));
            let _ = writeln!(text, "  down transition  {}A", si(r.i_t2));
            let _ = writeln!(text, "  width            {}A", si(r.i_hy));
            let _ = writeln!(text, "i_t1={:e}", r.i_t1);
            let _ = writeln!(text, "i_t2={:e}", r.i_t2);
            let _ = writeln!(text, "i_hy={:e}", r.i_hy);
            let _ = writeln!(text, "resolution={:e}", r.resolution);
            let _ = writeln!(text, "threshold={:e}", r.threshold);
            emit(&text, out.output.as_deref())
        }
        Command::Delay {
            input,
            amp,
            period,
            center,
            rise,
            dt,
            source,
            node,
            out,
        } => {
            if !(amp > 0.0 && period > 0.0 && rise > 0.0 && 2.0 * rise < period) {
                return Err(CliError::Usage(
                    "need amp > 0, period > 0 and 0 < rise < period/2".into(),
                ));
            }
            let mut nl = load(&input)?;
            let vdd = supply(&nl);
            let delay = period / 4.0;
            let spec = nl
                .source_mut(&source)
                .ok_or_else(|| CliError::Analysis(AnalysisError::UnknownSource(source.clone())))?;
            *spec = SourceSpec::Pulse(Pulse {
                v1: center - amp,
                v2: center + amp,
                delay,
                rise,
                fall: rise,
                width: 0.5 * period - rise,
                period,
            });
            let dt = dt.unwrap_or(rise / 20.0);
            let w = transient(&nl, dt, delay + 2.0 * period, &opts)?;
            let input = stimulus_trace(&nl, &source, &w)?;
            let output = w
                .trace(&node)
                .ok_or_else(|| CliError::Analysis(AnalysisError::UnknownNode(node.clone())))?;
            let d = measure_delay(&input, &output, vdd)?;
            let mut text = String::new();
            let _ = writeln!(
                text,
                "delay of {node} for {source} = {}A +/- {}A, period {}s, dt {}s",
                si(center),
                si(amp),
                si(period),
                si(dt)
            );
            let _ = writeln!(text, "  t_plh    {}s", si(d.t_plh));
            let _ = writeln!(text, "  t_phl    {}s", si(d.t_phl));
            let _ = writeln!(text, "  average  {}s", si(d.average));
            let _ = writeln!(text, "t_plh={:e}", d.t_plh);
            let _ = writeln!(text, "t_phl={:e}", d.t_phl);
            let _ = writeln!(text, "average={:e}", d.average);
            emit(&text, out.output.as_deref())
        }
        Command::Gen {
            variant,
            lambda,
            out,
        } => {
            let nl = generated(variant.into(), lambda)?;
            emit(&nl.to_text(), out.output.as_deref())
        }
        Command::Analytic {
            kn7,
            kn9,
            kp3,
            kp5,
            vth,
            id1,
            id2,
            iref,
            vc,
            vd,
            iin,
            out,
        } => {
            let op = LatchOperatingPoint {
                k_n7: kn7,
                k_n9: kn9,
                k_p3: kp3,
                k_p5: kp5,
                v_th: vth,
                i_d1: id1,
                i_d2: id2,
                i_ref: iref,
                v_c: vc,
                v_d: vd,
                i_1: 0.0,
                i_2: 0.0,
            };
            let (sq_c, sq_d) = node_squares(&op, iin)?;
            let k = kn9 / kn7;
            let p = current_ratio(vc, vd, vth, k, TriodeCross::M8)?;
            let p_prime = current_ratio(vc, vd, vth, k, TriodeCross::M9)?;
            let t = transition_currents(iref, id1, id2, p, p_prime);
            let mut text = String::new();
            for (key, v) in [
                ("sq_c", sq_c),
                ("sq_d", sq_d),
                ("p", p),
                ("p_prime", p_prime),
                ("i_a", t.i_a),
                ("i_b", t.i_b),
                ("i_t1", t.i_t1),
                ("i_t2", t.i_t2),
                ("i_hy", t.i_hy),
            ] {
                let _ = writeln!(text, "{key}={v:e}");
            }
            emit(&text, out.output.as_deref())
        }
    }
}

fn generated(variant: Variant, lambda: Option<f64>) -> Result<Netlist, CliError> {
    let mut cfg = ComparatorConfig::new(variant);
    if let Some(l) = lambda {
        if !(l >= 0.0) {
            return Err(CliError::Usage("--lambda must be non-negative".into()));
        }
        cfg = cfg.with_lambda(l);
    }
    Ok(build_comparator(&cfg)?)
}

pub fn load(input: &Input) -> Result<Netlist, CliError> {
    match (&input.netlist, input.variant) {
        (_, Some(v)) => generated(v.into(), input.lambda),
        (Some(path), None) => read_netlist(path),
        (None, None) => Err(CliError::Usage("need a netlist path or --variant".into())),
    }
}

fn read_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_netlist(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// DC value of the `VDD` source, or 3 V when there is none.
fn supply(nl: &Netlist) -> f64 {
    match nl.source("VDD") {
        Some(SourceSpec::Dc(v)) => *v,
        _ => DEFAULT_SUPPLY,
    }
}

/// Up and down sweeps between `from` and `to`, run on two threads.
fn sweep_pair(
    nl: &Netlist,
    source: &str,
    from: f64,
    to: f64,
    step: f64,
    opts: &SolverOptions,
) -> Result<(SweepCurve, SweepCurve), AnalysisError> {
    let (lo, hi) = (from.min(to), from.max(to));
    let (up, down) = std::thread::scope(|s| {
        let up = s.spawn(|| dc_sweep(nl, source, lo, hi, step, opts));
        let down = dc_sweep(nl, source, hi, lo, step, opts);
        (up.join().expect("sweep thread panicked"), down)
    });
    Ok((up?, down?))
}
