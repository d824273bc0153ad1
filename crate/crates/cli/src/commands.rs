use std::io::{self, BufRead, IsTerminal, Write};
use std::path::Path;

use tactile_core::analysis::{self, load_inputs, PropertySelection};
use tactile_core::device::SimulatedDriver;
use tactile_core::experiment::{acceptability_summary, distinct_sensation_stats};
use tactile_core::physics::estimate_currents;
use tactile_core::stats::anova_csv;
use tactile_service::lab::{safety_sweep, simulate as simulate_trace, sweep_csv, SweepRow, TraceRequest};
use tactile_service::{check_bind_address, AppState, ServiceConfig};

use crate::{AnalyzeArgs, CliError, DriveArgs, SafetyArgs, ServeArgs, SimulateArgs};

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let config = ServiceConfig { limits: a.stack.limits()?, ..ServiceConfig::default() };
    let req = TraceRequest { voltage: a.v, frequency: a.f, duration_ms: a.ms, sample_rate: a.rate };
    let sim = simulate_trace(&config.limits, &config.booster, &req)
        .map_err(|e| CliError::Validation(format!("{}: {e}", e.code())))?;
    let t = &sim.trace;
    let m = &sim.metrics;
    let peak = |xs: &[f64]| xs.iter().cloned().fold(0.0, f64::max);
    println!("samples          {} at {} Hz ({} ms)", t.len(), t.sample_rate, t.duration() * 1000.0);
    println!("peak normal      {:.6e} N", peak(&t.normal_force));
    println!("peak friction    {:.6e} N", peak(&t.friction_force));
    println!("peak-to-peak     {:.6e} N", m.peak_to_peak);
    println!("mean friction    {:.6e} N", m.mean);
    println!("ac rms           {:.6e} N", m.ac_rms);
    println!("fundamental      {:.3} Hz", m.fundamental);
    if let Some(s) = sim.safety {
        println!("avg current      {:.3e} A (limit {:.1e} A)", s.average_rectified_current, s.limit);
        println!("peak current     {:.3e} A (limit {:.1e} A)", s.peak_current, s.peak_limit);
    }
    if let Some(out) = a.out {
        write_out(&out, &sim.to_csv())?;
    }
    Ok(())
}

fn print_sweep(rows: &[SweepRow]) {
    println!("{:>6} {:>6} {:>12} {:>12} {:>5}", "V", "Hz", "avg A", "peak A", "pass");
    for r in rows {
        println!(
            "{:>6} {:>6} {:>12.4e} {:>12.4e} {:>5}",
            r.voltage,
            r.frequency,
            r.report.average_rectified_current,
            r.report.peak_current,
            if r.report.pass { "yes" } else { "NO" }
        );
    }
}

pub fn safety(a: SafetyArgs) -> Result<(), CliError> {
    let limits = a.stack.limits()?;
    match (a.sweep, a.v, a.f) {
        (true, _, _) => {
            let rows = safety_sweep(&limits).map_err(|e| CliError::Validation(e.to_string()))?;
            print_sweep(&rows);
            if let Some(out) = a.out {
                write_out(&out, &sweep_csv(&rows))?;
            }
            Ok(())
        }
        (false, Some(v), Some(f)) => {
            let r = estimate_currents(&limits.stack, v, f, &limits.envelope)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            println!("average current  {:.4e} A (limit {:.1e} A)", r.average_rectified_current, r.limit);
            println!("peak current     {:.4e} A (limit {:.1e} A)", r.peak_current, r.peak_limit);
            println!("pass             {}", if r.pass { "yes" } else { "NO" });
            Ok(())
        }
        _ => Err(CliError::Validation("use --sweep or give both --v and --f".into())),
    }
}

pub fn drive(a: DriveArgs) -> Result<(), CliError> {
    let mut driver = SimulatedDriver::new(a.stack.limits()?);
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = io::stdout().lock();
    if !interactive {
        return Ok(driver.serve(stdin.lock(), out)?);
    }
    writeln!(out, "commands: SET V <volts> | SET F <hz> | ON | OFF | STATUS; Ctrl-D to quit")?;
    let mut lines = stdin.lock().lines();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next().transpose()? else { break };
        if line.trim().is_empty() {
            continue;
        }
        writeln!(out, "{}", driver.send_line(&line))?;
    }
    // leave the cloth de-energized
    driver.send_line("OFF");
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let selection: PropertySelection = a.property.parse().map_err(|e: analysis::AnalysisError| {
        CliError::Validation(e.to_string())
    })?;
    let (observations, sessions) = load_inputs(&a.files).map_err(|e| match e {
        analysis::AnalysisError::Read { .. } => CliError::Runtime(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    })?;
    let results = analysis::analyze(&observations, &selection).map_err(|e| CliError::Validation(e.to_string()))?;
    println!("{:<10} {:<18} {:>4} {:>4} {:>12} {:>12}", "property", "term", "df1", "df2", "F", "p");
    for (property, rows) in &results {
        for r in rows {
            println!(
                "{:<10} {:<18} {:>4} {:>4} {:>12.4} {:>12.4e}",
                property,
                r.term.label(),
                r.df_num,
                r.df_den,
                r.f_stat,
                r.p_value
            );
        }
    }
    if sessions.len() >= 2 {
        if let Ok(d) = distinct_sensation_stats(&sessions) {
            println!("\ndistinct sensations: mean {:.2}, variance {:.2} over {} sessions", d.mean, d.variance, d.sessions);
        }
        println!("\n{:<12} {:>10}", "condition", "accepted");
        for row in acceptability_summary(&sessions) {
            println!("{:<12} {:>9.0}%", row.condition.label(), row.accept_fraction * 100.0);
        }
    }
    if let Some(out) = a.out {
        write_out(&out, &anova_csv(&results))?;
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result<(), CliError> {
    check_bind_address(&a.bind, a.allow_external).map_err(CliError::Validation)?;
    let config = ServiceConfig {
        limits: a.stack.limits()?,
        data_dir: a.data_dir,
        assets_dir: a.assets,
        ..ServiceConfig::default()
    };
    let state = AppState::new(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.bind).await?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        tactile_service::serve(listener, state).await
    })?;
    Ok(())
}
