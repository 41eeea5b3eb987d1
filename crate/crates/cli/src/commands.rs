use std::collections::BTreeMap;
use std::path::PathBuf;

use fraclv::basin::{
    boundary_extract, detect_self_intersection, scan_basin, scan_grid, BasinMap, BasinMetadata,
    ClassifyOptions, GridSpec, OutcomeLabel, Parallelism, ScanConfig,
};
use fraclv::lotka::{
    decimate, separatrix_residual, separatrix_trace_with, LotkaParams, TraceOptions,
};
use fraclv::solver::{AbmScheme, SolverOptions, Trajectory};
use fraclv::stability::{analyze_equilibrium_with, VectorField};
use serde_json::{json, Value};

use crate::config::{GenericModel, Model, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Format, Sink, Table};
use crate::svg::Plot;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub workers: Option<usize>,
    pub detect_ties: bool,
}

fn check_formats(command: &str, formats: &[Format], allowed: &[Format]) -> CliResult<()> {
    match formats.iter().find(|f| !allowed.contains(f)) {
        Some(f) => Err(CliError::Config(format!(
            "{command} cannot write {}; choose from {}",
            f.name(),
            allowed
                .iter()
                .map(|f| f.name())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
        None => Ok(()),
    }
}

fn order_strings(model: &Model) -> Vec<String> {
    match model {
        Model::Lotka(s) => vec![s.alpha.to_string(), s.beta.to_string()],
        Model::Generic(g) => g.orders.iter().map(ToString::to_string).collect(),
    }
}

fn equilibria_2d(model: &Model) -> Vec<[f64; 2]> {
    match model {
        Model::Lotka(s) => s.params.equilibria().to_vec(),
        Model::Generic(g) => g
            .equilibria
            .iter()
            .filter(|e| e.len() >= 2)
            .map(|e| [e[0], e[1]])
            .collect(),
    }
}

/// Integrates one initial point with the `[simulate]` settings.
fn integrate(model: &Model, cfg: &RunConfig, y0: &[f64]) -> CliResult<(Trajectory, Vec<String>)> {
    let sim = &cfg.simulate;
    let options = SolverOptions {
        escape_magnitude: sim.escape_magnitude,
    };
    match model {
        Model::Lotka(s) => {
            let &[a, b] = y0 else {
                return Err(CliError::Config(format!(
                    "initial point needs 2 components, got {}",
                    y0.len()
                )));
            };
            let layout = s.simulation_layout();
            let scheme = AbmScheme::new(layout.orders(), sim.h, sim.t_end)
                .map_err(|e| CliError::at("simulate", e))?;
            let traj = scheme.solve(
                &layout.rhs(),
                &layout.initial_state([a, b], sim.dy0),
                &options,
            )?;
            Ok((
                traj,
                layout.names().iter().map(ToString::to_string).collect(),
            ))
        }
        Model::Generic(g) => {
            let n = g.field.dim();
            if y0.len() != n {
                return Err(CliError::Config(format!(
                    "initial point needs {n} components, got {}",
                    y0.len()
                )));
            }
            let orders: Vec<f64> = g.orders.iter().map(|o| o.value()).collect();
            let scheme = AbmScheme::new(&orders, sim.h, sim.t_end)
                .map_err(|e| CliError::at("simulate", e))?;
            let rhs = |_: f64, y: &[f64], out: &mut [f64]| g.field.eval(y, out);
            let traj = scheme.solve(&rhs, y0, &options)?;
            Ok((traj, (1..=n).map(|k| format!("y{k}")).collect()))
        }
    }
}

fn draw_nullclines(plot: &mut Plot, p: &LotkaParams) {
    let grey = "#bbbbbb";
    plot.vline(0.0, grey);
    plot.vline(p.c / p.b, grey);
    plot.hline(0.0, grey);
    plot.hline(p.a / p.b, grey);
}

pub fn simulate(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    check_formats(
        "simulate",
        &opts.formats,
        &[Format::Csv, Format::Json, Format::Svg],
    )?;
    let model = cfg.model()?;
    let y0 = cfg
        .simulate
        .y0
        .clone()
        .ok_or_else(|| CliError::Config("simulate.y0 is required".into()))?;
    let (traj, names) = integrate(&model, cfg, &y0)?;

    let mut sink = Sink::new(&opts.out)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(names.iter().cloned());
    let mut table = Table::new(&columns);
    for (t, y) in traj.times().iter().zip(traj.states()) {
        table.push_nums(std::iter::once(*t).chain(y.iter().copied()));
    }
    sink.table("trajectory", &table, &opts.formats)?;

    let planar = traj.dim() >= 2;
    let mut sidecar = json!({
        "command": "simulate",
        "columns": columns,
        "orders": order_strings(&model),
        "h": cfg.simulate.h,
        "t_end": cfg.simulate.t_end,
        "y0": y0,
        "escaped": traj.escaped(),
        "steps": traj.len() - 1,
        "final_time": traj.last_time(),
        "final_state": traj.last_state(),
    });
    if opts.detect_ties {
        if !planar {
            return Err(CliError::Unsupported(
                "tie detection needs at least two state components".into(),
            ));
        }
        let report = detect_self_intersection(&traj.project(0, 1));
        sidecar["ties"] = json!({
            "count": report.crossings.len(),
            "crossings": report.crossings,
            "degenerate": report.degenerate,
        });
    }
    sink.json("simulate.json", &sidecar)?;

    if opts.formats.contains(&Format::Svg) {
        if !planar {
            return Err(CliError::Unsupported(
                "a phase portrait needs at least two state components".into(),
            ));
        }
        let path = traj.project(0, 1);
        let eq = equilibria_2d(&model);
        let mut plot = Plot::new(Plot::fit(path.iter().chain(&eq)));
        if let Model::Lotka(s) = &model {
            draw_nullclines(&mut plot, &s.params);
        }
        plot.polyline(&path, PALETTE[0]);
        for e in eq {
            plot.marker(e, 4.0, "black");
        }
        plot.marker(path[0], 3.0, PALETTE[1]);
        sink.text(
            "trajectory.svg",
            &plot.finish(&format!("orders {}", order_strings(&model).join(", "))),
        )?;
    }
    Ok(sink.written)
}

pub fn stability(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    check_formats("stability", &opts.formats, &[Format::Json])?;
    let model = cfg.model()?;
    let tol = cfg.stability.tol_band;
    let mut sink = Sink::new(&opts.out)?;
    let report = match &model {
        Model::Lotka(s) => {
            if let Err(e) = s.order_case() {
                let body = json!({
                    "status": "unsupported-case",
                    "reason": e.to_string(),
                    "alpha": s.alpha.to_string(),
                    "beta": s.beta.to_string(),
                });
                sink.json("stability.json", &body)?;
                println!(
                    "{}",
                    serde_json::to_string(&body).expect("plain JSON value")
                );
                return Err(e.into());
            }
            let closed = s.closed_form_stability()?;
            let numeric = s.numeric_stability_with(tol)?;
            let entries: Vec<Value> = [
                ("origin", closed.origin, &numeric.origin),
                ("coexistence", closed.coexistence, &numeric.coexistence),
            ]
            .into_iter()
            .map(|(name, verdict, rep)| {
                json!({
                    "name": name,
                    "point": rep.point,
                    "closed_form": verdict,
                    "numeric": rep,
                    "agree": verdict == rep.verdict(),
                })
            })
            .collect();
            json!({
                "status": "ok",
                "model": "lotka",
                "params": s.params,
                "orders": order_strings(&model),
                "case": closed.case,
                "tol_band": tol,
                "equilibria": entries,
            })
        }
        Model::Generic(g) => generic_stability(g, tol)?,
    };
    sink.json("stability.json", &report)?;
    Ok(sink.written)
}

fn generic_stability(g: &GenericModel, tol: f64) -> CliResult<Value> {
    if g.equilibria.is_empty() {
        return Err(CliError::Config(
            "model.equilibria must list the points to analyse".into(),
        ));
    }
    let entries = g
        .equilibria
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let rep = analyze_equilibrium_with(&g.field, e, &g.orders, tol)
                .map_err(|err| CliError::at(&format!("model.equilibria[{k}]"), err))?;
            Ok(json!({ "name": format!("equilibrium {k}"), "point": e, "numeric": rep }))
        })
        .collect::<CliResult<Vec<Value>>>()?;
    Ok(json!({
        "status": "ok",
        "model": "generic",
        "orders": g.orders.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "tol_band": tol,
        "equilibria": entries,
    }))
}

fn label_color(label: OutcomeLabel) -> &'static str {
    match label {
        OutcomeLabel::ConvergedTo(0) => "#9ecae1",
        OutcomeLabel::ConvergedTo(1) => "#a1d99b",
        OutcomeLabel::ConvergedTo(_) => "#bcbddc",
        OutcomeLabel::Escaped => "#fc9272",
        OutcomeLabel::Undetermined => "#d9d9d9",
    }
}

pub fn basin(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    check_formats(
        "basin",
        &opts.formats,
        &[Format::Csv, Format::Json, Format::Svg],
    )?;
    let model = cfg.model()?;
    let b = cfg
        .basin
        .as_ref()
        .ok_or_else(|| CliError::Config("the basin command needs a [basin] section".into()))?;
    let grid = GridSpec::new(b.y1, b.y2, b.n1, b.n2).map_err(|e| CliError::at("basin", e))?;
    let scan = ScanConfig {
        t_end: b.t_end,
        h: b.h,
        classify: ClassifyOptions {
            epsilon: b.epsilon,
            window_fraction: b.window_fraction,
        },
        escape_magnitude: b.escape_magnitude,
        perturbation: b.perturbation,
    };
    let parallelism = Parallelism::from_workers(opts.workers);
    let map = match &model {
        Model::Lotka(s) => {
            scan_basin(s, &grid, &scan, parallelism).map_err(|e| CliError::at("basin", e))?
        }
        Model::Generic(g) => generic_basin(g, cfg, &grid, &scan, parallelism)?,
    };

    let mut sink = Sink::new(&opts.out)?;
    let mut table = Table::new(&["i", "j", "y1", "y2", "label"]);
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            let [y1, y2] = grid.node(i, j);
            table.push(vec![
                Cell::Int(i),
                Cell::Int(j),
                Cell::Num(y1),
                Cell::Num(y2),
                Cell::Text(map.label(i, j).to_string()),
            ]);
        }
    }
    let boundary = boundary_extract(&map, b.target);
    let mut edge = Table::new(&["y1", "y2"]);
    for p in &boundary.points {
        edge.push_nums(*p);
    }
    sink.table("basin", &table, &opts.formats)?;
    sink.table("boundary", &edge, &opts.formats)?;

    let mut counts = BTreeMap::new();
    for l in &map.labels {
        *counts.entry(l.to_string()).or_insert(0usize) += 1;
    }
    let sidecar = json!({
        "command": "basin",
        "grid": map.grid,
        "metadata": map.metadata,
        "counts": counts,
        "boundary": {
            "target": boundary.target,
            "points": boundary.points.len(),
            "note": boundary.note,
        },
    });
    sink.json("basin_meta.json", &sidecar)?;

    if opts.formats.contains(&Format::Svg) {
        let [dx, dy] = grid.spacing();
        let half = [0.5 * dx.max(1e-9), 0.5 * dy.max(1e-9)];
        let corners = [
            [b.y1[0] - half[0], b.y2[0] - half[1]],
            [b.y1[1] + half[0], b.y2[1] + half[1]],
        ];
        let mut plot = Plot::new([corners[0][0], corners[1][0], corners[0][1], corners[1][1]]);
        for j in 0..grid.n2 {
            for i in 0..grid.n1 {
                plot.cell(grid.node(i, j), half, label_color(map.label(i, j)));
            }
        }
        for p in &boundary.points {
            plot.marker(*p, 1.5, "black");
        }
        for e in equilibria_2d(&model) {
            plot.marker(e, 4.0, "black");
        }
        sink.text(
            "basin.svg",
            &plot.finish(&format!("basin of equilibrium {}", b.target)),
        )?;
    }
    Ok(sink.written)
}

fn generic_basin(
    g: &GenericModel,
    cfg: &RunConfig,
    grid: &GridSpec,
    scan: &ScanConfig,
    parallelism: Parallelism,
) -> CliResult<BasinMap> {
    let n = g.field.dim();
    if n < 2 {
        return Err(CliError::Unsupported(
            "a basin scan needs at least two state components".into(),
        ));
    }
    if g.equilibria.is_empty() {
        return Err(CliError::Config(
            "model.equilibria must list the attractors to classify against".into(),
        ));
    }
    // components beyond the scanned pair start from simulate.y0
    let tail: Vec<f64> = match &cfg.simulate.y0 {
        Some(y0) if y0.len() == n => y0[2..].to_vec(),
        _ => vec![0.0; n - 2],
    };
    let orders: Vec<f64> = g.orders.iter().map(|o| o.value()).collect();
    let rhs = |_: f64, y: &[f64], out: &mut [f64]| g.field.eval(y, out);
    let initial = |node: [f64; 2]| {
        let mut y = node.to_vec();
        y.extend_from_slice(&tail);
        y
    };
    let labels = scan_grid(
        &rhs,
        &orders,
        initial,
        &g.equilibria,
        grid,
        scan,
        parallelism,
    )
    .map_err(|e| CliError::at("basin", e))?;
    let metadata = BasinMetadata {
        params: None,
        orders: g.orders.iter().map(ToString::to_string).collect(),
        equilibria: g.equilibria.clone(),
        config: *scan,
    };
    Ok(BasinMap::new(*grid, labels, metadata)?)
}

fn lotka_only(model: &Model, command: &str) -> CliResult<LotkaParams> {
    match model {
        Model::Lotka(s) => Ok(s.params),
        Model::Generic(_) => Err(CliError::Unsupported(format!(
            "{command} is defined for the lotka model only"
        ))),
    }
}

pub fn separatrix(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    check_formats(
        "separatrix",
        &opts.formats,
        &[Format::Csv, Format::Json, Format::Svg],
    )?;
    let model = cfg.model()?;
    let params = lotka_only(&model, "separatrix")?;
    let sc = &cfg.separatrix;
    let options = TraceOptions {
        offset: sc.offset,
        step: sc.step,
        budget: sc.budget,
        window: sc.window,
        project: sc.project,
    };
    let trace =
        separatrix_trace_with(&params, &options).map_err(|e| CliError::at("separatrix", e))?;
    let points = decimate(&trace.polyline(), sc.points);

    let mut table = Table::new(&["y1", "y2", "residual"]);
    let mut worst: f64 = 0.0;
    for p in &points {
        let r = separatrix_residual(&params, *p).map_err(|e| match e {
            fraclv::Error::Domain(m) => CliError::Unsupported(format!("residual undefined: {m}")),
            other => other.into(),
        })?;
        worst = worst.max(r.abs());
        table.push_nums([p[0], p[1], r]);
    }

    let mut sink = Sink::new(&opts.out)?;
    sink.table("separatrix", &table, &opts.formats)?;
    sink.json(
        "separatrix_meta.json",
        &json!({
            "command": "separatrix",
            "params": params,
            "saddle": trace.saddle,
            "direction": trace.direction,
            "truncated": trace.truncated,
            "points": points.len(),
            "max_abs_residual": worst,
            "options": options,
        }),
    )?;
    if opts.formats.contains(&Format::Svg) {
        let eq = params.equilibria();
        let mut plot = Plot::new(match sc.window {
            Some([x0, x1, y0, y1]) => [x0, x1, y0, y1],
            None => Plot::fit(points.iter().chain(&eq)),
        });
        draw_nullclines(&mut plot, &params);
        plot.polyline(&points, PALETTE[1]);
        for e in eq {
            plot.marker(e, 4.0, "black");
        }
        sink.text("separatrix.svg", &plot.finish("separatrix"))?;
    }
    Ok(sink.written)
}

pub fn portrait(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    check_formats(
        "portrait",
        &opts.formats,
        &[Format::Csv, Format::Json, Format::Svg],
    )?;
    let model = cfg.model()?;
    let starts: Vec<Vec<f64>> = if cfg.portrait.starts.is_empty() {
        cfg.simulate.y0.iter().cloned().collect()
    } else {
        cfg.portrait.starts.clone()
    };
    if starts.is_empty() {
        return Err(CliError::Config(
            "portrait.starts or simulate.y0 is required".into(),
        ));
    }
    let mut curves = Vec::with_capacity(starts.len());
    for (k, y0) in starts.iter().enumerate() {
        let (traj, _) = integrate(&model, cfg, y0).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("portrait.starts[{k}]: {m}")),
            other => other,
        })?;
        if traj.dim() < 2 {
            return Err(CliError::Unsupported(
                "a phase portrait needs at least two state components".into(),
            ));
        }
        curves.push(traj);
    }

    let mut table = Table::new(&["curve", "t", "y1", "y2"]);
    for (k, traj) in curves.iter().enumerate() {
        for (t, y) in traj.times().iter().zip(traj.states()) {
            table.push(vec![
                Cell::Int(k),
                Cell::Num(*t),
                Cell::Num(y[0]),
                Cell::Num(y[1]),
            ]);
        }
    }
    let mut sink = Sink::new(&opts.out)?;
    sink.table("portrait", &table, &opts.formats)?;
    let summary: Vec<Value> = curves
        .iter()
        .zip(&starts)
        .map(|(t, y0)| json!({ "y0": y0, "escaped": t.escaped(), "steps": t.len() - 1, "final_state": t.last_state() }))
        .collect();
    sink.json(
        "portrait_meta.json",
        &json!({ "command": "portrait", "orders": order_strings(&model), "curves": summary }),
    )?;

    if opts.formats.contains(&Format::Svg) {
        let eq = equilibria_2d(&model);
        let anchors: Vec<[f64; 2]> = starts
            .iter()
            .map(|s| [s[0], s[1]])
            .chain(eq.iter().copied())
            .collect();
        let mut plot = Plot::new(cfg.portrait.window.unwrap_or_else(|| {
            let [x0, x1, y0, y1] = Plot::fit(&anchors);
            // leave room for the motion around the anchors
            let (px, py) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
            [x0 - px, x1 + px, y0 - py, y1 + py]
        }));
        if let Model::Lotka(s) = &model {
            draw_nullclines(&mut plot, &s.params);
            if s.params.a * s.params.c < 0.0 {
                let opts = TraceOptions {
                    budget: 10.0,
                    ..TraceOptions::default()
                };
                if let Ok(t) = separatrix_trace_with(&s.params, &opts) {
                    plot.polyline(&t.polyline(), "#555555");
                }
            }
        }
        for (k, traj) in curves.iter().enumerate() {
            let path = traj.project(0, 1);
            plot.polyline(&path, PALETTE[k % PALETTE.len()]);
            plot.marker(path[0], 3.0, PALETTE[k % PALETTE.len()]);
        }
        for e in eq {
            plot.marker(e, 4.0, "black");
        }
        sink.text(
            "portrait.svg",
            &plot.finish(&format!("orders {}", order_strings(&model).join(", "))),
        )?;
    }
    Ok(sink.written)
}
