//! Dispatch from an [`ExperimentSpec`] to the library, producing the
//! artifact bytes. Nothing here touches the filesystem; `main` writes.

use bootlab::asymptotics::{invert_pc, paradox_crossovers, pc_terms, growth_count_formula};
use bootlab::exact::{
    decompose_paths, enumerate_growth_configs, enumerate_infectors, enumerate_spanning_pairs,
    minimal_up_traversable_subset, shapes_to_json, spanning_time, MAX_EXHAUSTIVE_CELLS,
};
use bootlab::lattice::{event_holds, make_rule, EventKind, NeighbourhoodRule, Rect};
use bootlab::mc::{
    droplet_if_scan, epsilon_window, estimate_event, sample_seeds, staged_growth_experiment,
    EstimateRecord, EventSpec, PcSearch, TrialPlan, DEFAULT_CELL_BUDGET,
};
use bootlab::par;
use bootlab::variational::{
    delta_curve, staircase_weight_scaled, w_closed_scaled, w_min_scaled, PotentialParams,
};
use serde_json::{json, Value};

use crate::render::{infection_svg, simulate_infection, stable_regions, COLORMAP_NOTE};
use crate::report::{comparison_report, line_plot};
use crate::spec::{CommandKind, EnumerateTarget, ExperimentSpec, Format};

#[derive(Debug)]
pub enum CliError {
    BadSpec(String),
    Compute(bootlab::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::BadSpec(_) => 2,
            Self::Compute(_) => 3,
            Self::Io(_) => 4,
        }
    }

    /// One-line machine-readable error record.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            Self::BadSpec(m) => ("bad-spec", m.clone()),
            Self::Compute(e) => (e.kind(), e.to_string()),
            Self::Io(m) => ("io-error", m.clone()),
        };
        json!({"error": kind, "message": message, "exit_code": self.exit_code()}).to_string()
    }
}

impl From<bootlab::Error> for CliError {
    fn from(e: bootlab::Error) -> Self {
        Self::Compute(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_json())
    }
}

impl std::error::Error for CliError {}

/// The artifacts of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Written to `--out`, or stdout.
    pub primary: Vec<u8>,
    /// Auxiliary files `(name, bytes)`, written beside `--out`.
    pub extras: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

impl RunOutput {
    fn new(primary: impl Into<Vec<u8>>, summary: String) -> Self {
        Self {
            primary: primary.into(),
            extras: Vec::new(),
            summary,
        }
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn opt(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    spec.validate().map_err(CliError::BadSpec)?;
    let rule = make_rule(&spec.rule).map_err(|e| CliError::BadSpec(e.to_string()))?;
    match spec.command {
        CommandKind::Simulate => simulate(spec, &rule),
        CommandKind::Closure | CommandKind::Render => closure_cmd(spec, &rule),
        CommandKind::Traverse => traverse(spec, &rule),
        CommandKind::PcSearch => pc_search(spec, &rule),
        CommandKind::Window => window(spec, &rule),
        CommandKind::Droplet => droplet(spec),
        CommandKind::Enumerate => enumerate(spec),
        CommandKind::Asymptotics => asymptotics(spec),
        CommandKind::Variational => variational(spec),
        CommandKind::Paradox => paradox(spec),
    }
}

fn densities(spec: &ExperimentSpec) -> Vec<f64> {
    if spec.p_list.is_empty() {
        vec![spec.p]
    } else {
        spec.p_list.clone()
    }
}

fn simulate(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> Result<RunOutput, CliError> {
    let mut records = Vec::new();
    for p in densities(spec) {
        let event = EventSpec::new(rule.clone(), spec.width, spec.height, spec.event, p);
        let est = estimate_event(&TrialPlan {
            master_seed: spec.seed,
            trials: spec.trials,
            event: event.clone(),
            parallel_width: spec.workers(),
        })?;
        records.push(EstimateRecord::new(&event, &est, spec.seed));
    }
    let body = match spec.format() {
        Format::Json => records.iter().map(|r| r.to_json_line() + "\n").collect::<String>(),
        _ => {
            let mut s = String::from("event,p,L,width,height,trials,successes,p_hat,ci_lo,ci_hi,seed\n");
            for r in &records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.event, r.p, r.l, r.width, r.height, r.trials, r.successes, r.p_hat, r.ci_lo, r.ci_hi, r.seed
                ));
            }
            s
        }
    };
    let summary = format!(
        "simulate: {} on {}x{}, {} densities x {} trials",
        spec.event.name(),
        spec.width,
        spec.height,
        records.len(),
        spec.trials
    );
    Ok(RunOutput::new(body, summary))
}

fn closure_cmd(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> Result<RunOutput, CliError> {
    let inf = simulate_infection(spec.width, spec.height, spec.p, rule, spec.seed);
    let regions = stable_regions(&inf.closure, rule);
    let non_rect = regions.iter().filter(|r| !r.rectangular && r.stable).count();
    let (w, h) = (spec.width, spec.height);
    let primary: Vec<u8> = match spec.format() {
        Format::Svg => infection_svg(&inf.field).into_bytes(),
        #[cfg(feature = "png")]
        Format::Png => crate::render::infection_png(&inf.field).map_err(|e| CliError::Io(e.to_string()))?,
        #[cfg(not(feature = "png"))]
        Format::Png => return Err(CliError::BadSpec("built without PNG support".into())),
        Format::Csv => {
            let mut s = String::from("x,y,seed,generation\n");
            for y in 0..h {
                for x in 0..w {
                    if let Some(t) = inf.field.time(x, y) {
                        s.push_str(&format!("{x},{y},{},{t}\n", inf.seeds.get(x, y) as u8));
                    }
                }
            }
            s.into_bytes()
        }
        Format::Json => {
            let generations: Vec<Vec<Value>> = (0..h)
                .map(|y| (0..w).map(|x| inf.field.time(x, y).map_or(Value::Null, |t| json!(t))).collect())
                .collect();
            json_bytes(&json!({
                "command": spec.command.name(),
                "width": w,
                "height": h,
                "p": spec.p,
                "seed": spec.seed,
                "seeds": inf.seeds.count(),
                "infected": inf.closure.count(),
                "filled": inf.closure.is_full(),
                "max_generation": inf.field.max_time(),
                "colormap": COLORMAP_NOTE,
                "regions": regions,
                "generations": generations,
            }))
        }
    };
    let mut out = RunOutput::new(
        primary,
        format!(
            "{}: {}x{} at p={}, {} seeds -> {} infected, {} regions ({} non-rectangular stable)",
            spec.command.name(),
            w,
            h,
            spec.p,
            inf.seeds.count(),
            inf.closure.count(),
            regions.len(),
            non_rect
        ),
    );
    if spec.format() != Format::Json {
        out.extras.push((
            "regions.json".into(),
            json_bytes(&json!({"command": "regions", "regions": regions})),
        ));
    }
    Ok(out)
}

fn traverse(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> Result<RunOutput, CliError> {
    let seeds = sample_seeds(spec.width, spec.height, spec.p, spec.seed, 0);
    let rect = Rect::with_dims(spec.width as u64, spec.height as u64);
    let up = event_holds(EventKind::UpTrav, &rect, &seeds, rule);
    let hor = event_holds(EventKind::HorTrav, &rect, &seeds, rule);
    let small = rect.area() <= MAX_EXHAUSTIVE_CELLS && rule.anisotropic_b() == Some(2);
    let (mut minimal, mut tau, mut pairs, mut paths) = (Value::Null, Value::Null, Value::Null, Value::Null);
    if small && up {
        let m = minimal_up_traversable_subset(&rect, &seeds)?;
        let report = spanning_time(&rect, &seeds)?;
        if report.tau == 0 {
            paths = json!(decompose_paths(&m, &rect)?);
        }
        minimal = json!(m);
        tau = json!(report.tau);
        pairs = json!(report.per_row_pairs);
    }
    let seed_cells: Vec<(usize, usize)> = seeds.iter_occupied().collect();
    let body = json!({
        "command": "traverse",
        "width": spec.width,
        "height": spec.height,
        "p": spec.p,
        "seed": spec.seed,
        "seeds": seed_cells,
        "up_traversable": up,
        "hor_traversable": hor,
        "minimal_set": minimal,
        "tau": tau,
        "per_row_pairs": pairs,
        "paths": paths,
    });
    Ok(RunOutput::new(
        json_bytes(&body),
        format!(
            "traverse: {}x{} at p={}, up={up}, hor={hor}{}",
            spec.width,
            spec.height,
            spec.p,
            if small { "" } else { " (too large for the exact analysis)" }
        ),
    ))
}

fn search_template(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> PcSearch {
    PcSearch {
        target: spec.target,
        trials_per_probe: spec.trials_per_probe,
        max_trials_per_probe: spec.probe_cap,
        tol: spec.tol,
        master_seed: spec.seed,
        parallel_width: spec.workers(),
        ..PcSearch::new(spec.sizes[0], rule.clone())
    }
}

fn pc_search(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> Result<RunOutput, CliError> {
    let report = comparison_report(&spec.sizes, rule, &search_template(spec, rule))?;
    let svg = report.to_svg();
    let primary = match spec.format() {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["command"] = json!("pc-search");
            json_bytes(&v)
        }
        Format::Svg => svg.clone().into_bytes(),
        _ => report.to_csv().into_bytes(),
    };
    let mut out = RunOutput::new(
        primary,
        format!(
            "pc-search: {}",
            report
                .rows
                .iter()
                .map(|r| format!("L={} p_c={:.5}{}", r.l, r.measured, if r.capped { " (capped)" } else { "" }))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    for (row, res) in report.rows.iter().zip(&report.searches) {
        out.extras.push((format!("probes-L{}.csv", row.l), res.probe_csv().into_bytes()));
    }
    if spec.format() != Format::Svg {
        out.extras.push(("plot.svg".into(), svg.into_bytes()));
    }
    Ok(out)
}

fn window(spec: &ExperimentSpec, rule: &NeighbourhoodRule) -> Result<RunOutput, CliError> {
    let template = search_template(spec, rule);
    let mut rows = Vec::new();
    for &l in &spec.sizes {
        let w = epsilon_window(&PcSearch { l, ..template.clone() }, spec.eps)?;
        rows.push(json!({
            "L": l,
            "eps": spec.eps,
            "p_eps": w.p_eps.p_c,
            "p_one_minus_eps": w.p_one_minus_eps.p_c,
            "width": w.width(),
            "capped": w.p_eps.capped || w.p_one_minus_eps.capped,
        }));
    }
    let primary = match spec.format() {
        Format::Json => json_bytes(&json!({"command": "window", "rows": rows})),
        _ => {
            let mut s = String::from("L,eps,p_eps,p_one_minus_eps,width,capped\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r["L"], r["eps"], r["p_eps"], r["p_one_minus_eps"], r["width"], r["capped"]
                ));
            }
            s.into_bytes()
        }
    };
    Ok(RunOutput::new(primary, format!("window: eps={} at {} sizes", spec.eps, rows.len())))
}

fn droplet(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    if spec.staged {
        let g = par::with_workers(spec.workers(), || {
            staged_growth_experiment(spec.p, spec.trials, spec.seed, DEFAULT_CELL_BUDGET)
        })?;
        let primary = match spec.format() {
            Format::Json => json_bytes(&json!({"command": "droplet", "staged": g})),
            _ => {
                let mut s = String::from(
                    "ell,x,x_next,horizontal,horizontal_lo,horizontal_hi,vertical,vertical_lo,vertical_hi,vertical_bound,mid\n",
                );
                for st in &g.stages {
                    s.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        st.ell,
                        st.x,
                        st.x_next,
                        st.horizontal.p_hat,
                        st.horizontal.ci_lo,
                        st.horizontal.ci_hi,
                        st.vertical.p_hat,
                        st.vertical.ci_lo,
                        st.vertical.ci_hi,
                        csv_opt(st.vertical_bound),
                        st.mid
                    ));
                }
                s.into_bytes()
            }
        };
        return Ok(RunOutput::new(
            primary,
            format!("droplet: staged growth at p={}, m={}, {} trials per step", g.p, g.m, g.trials),
        ));
    }
    let ps = densities(spec);
    let rows = par::with_workers(spec.workers(), || {
        droplet_if_scan(&ps, spec.width, spec.height, spec.trials, spec.seed)
    })?;
    let primary = match spec.format() {
        Format::Json => json_bytes(&json!({"command": "droplet", "width": spec.width, "height": spec.height, "rows": rows})),
        _ => {
            let mut s = String::from("p,trials,successes,p_hat,ci_lo,ci_hi,log_p_hat,log_ci_hi,two_term,ratio,zero_successes\n");
            for r in &rows {
                let e = &r.estimate;
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.p,
                    e.trials,
                    e.successes,
                    e.p_hat,
                    e.ci_lo,
                    e.ci_hi,
                    csv_opt(r.log_p_hat),
                    r.log_ci_hi,
                    csv_opt(r.two_term),
                    csv_opt(r.ratio),
                    r.zero_successes
                ));
            }
            s.into_bytes()
        }
    };
    Ok(RunOutput::new(
        primary,
        format!("droplet: {}x{} internally filled at {} densities", spec.width, spec.height, rows.len()),
    ))
}

fn enumerate(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let (body, summary) = match spec.enumerate {
        EnumerateTarget::Pairs => {
            let rule = NeighbourhoodRule::anisotropic(spec.b)?;
            let shapes = enumerate_spanning_pairs(&rule)?;
            let n = shapes.len();
            (
                json!({"command": "enumerate", "target": "pairs", "b": spec.b, "count": n, "shapes": shapes_to_json(&shapes)}),
                format!("enumerate: {n} spanning-pair classes for b={}", spec.b),
            )
        }
        EnumerateTarget::Infectors => {
            let r = enumerate_infectors(spec.infector_rows, spec.infector_halfwidth)?;
            let summary = format!(
                "enumerate: {} infectors, {} not a single spanning pair",
                r.infectors.len(),
                r.non_pair.len()
            );
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["command"] = json!("enumerate");
            v["target"] = json!("infectors");
            (v, summary)
        }
        EnumerateTarget::Growth => {
            let g = enumerate_growth_configs(spec.b)?;
            let formula = growth_count_formula(spec.b)?;
            let summary = format!("enumerate: {} growth configurations for b={} (formula {formula})", g.count, spec.b);
            (
                json!({"command": "enumerate", "target": "growth", "b": g.b, "count": g.count, "formula": formula as u64, "shapes": shapes_to_json(&g.shapes)}),
                summary,
            )
        }
    };
    Ok(RunOutput::new(json_bytes(&body), summary))
}

fn asymptotics(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let mut rows = Vec::new();
    for &ll in &spec.log_l {
        let t = pc_terms(ll, spec.b)?;
        // Below the iteration's domain the inverted value is reported empty.
        let inv = invert_pc(ll, spec.eta).ok();
        rows.push((t, inv));
    }
    let primary = match spec.format() {
        Format::Json => json_bytes(&json!({
            "command": "asymptotics",
            "b": spec.b,
            "eta": spec.eta,
            "rows": rows.iter().map(|(t, inv)| json!({
                "log_l": t.log_l,
                "term1": t.term1,
                "term2": t.term2,
                "term3": t.term3,
                "pc_threeterm": t.three_term(),
                "invert_pc": inv,
            })).collect::<Vec<_>>(),
        })),
        _ => {
            let mut s = String::from("logL,term1,term2,term3,pc_threeterm,invert_pc\n");
            for (t, inv) in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t.log_l,
                    t.term1,
                    t.term2,
                    t.term3,
                    t.three_term(),
                    csv_opt(*inv)
                ));
            }
            s.into_bytes()
        }
    };
    Ok(RunOutput::new(
        primary,
        format!("asymptotics: b={}, {} values of ln L", spec.b, rows.len()),
    ))
}

fn variational(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let params = match spec.log_inv_p {
        Some(l) => PotentialParams::from_log_inv_p(l)?,
        None => PotentialParams::new(spec.p)?,
    };
    let delta = delta_curve(&params);
    let opt = w_min_scaled(delta.u_scaled, delta.v_scaled, &params, spec.grid_n)?;
    let closed = w_closed_scaled(&params);
    let p = params.p();
    let mut cumulative = Vec::with_capacity(opt.path.len());
    for i in 0..opt.path.len() {
        cumulative.push(staircase_weight_scaled(&opt.path[..=i], &params)?);
    }
    let primary = match spec.format() {
        Format::Json => json_bytes(&json!({
            "command": "variational",
            "log_inv_p": params.log_inv_p,
            "grid_n": spec.grid_n,
            "weight_scaled": opt.weight,
            "closed_form_scaled": closed,
            "u_scaled": [delta.u_scaled.0, delta.u_scaled.1],
            "v_scaled": [delta.v_scaled.0, delta.v_scaled.1],
            "path": opt.path.iter().zip(&cumulative).map(|(&(x, y), &c)| json!({
                "ln_x": x,
                "p_y": y,
                "x": opt_exp(x),
                "y": y / p,
                "cumulative_weight": c / p,
            })).collect::<Vec<_>>(),
        })),
        Format::Svg => overlay_svg(&delta, &opt.path).into_bytes(),
        _ => {
            let mut s = String::from("x,y,cumulative_weight,ln_x,p_y,delta_ln_x\n");
            for (&(x, y), &c) in opt.path.iter().zip(&cumulative) {
                s.push_str(&format!(
                    "{},{},{},{x},{y},{}\n",
                    x.exp(),
                    y / p,
                    c / p,
                    delta.x_log_of(y)
                ));
            }
            s.into_bytes()
        }
    };
    let mut out = RunOutput::new(
        primary,
        format!(
            "variational: ln(1/p)={:.4}, p*W_min={:.6}, closed form {:.6}",
            params.log_inv_p, opt.weight, closed
        ),
    );
    if spec.format() != Format::Svg {
        out.extras.push(("overlay.svg".into(), overlay_svg(&delta, &opt.path).into_bytes()));
    }
    Ok(out)
}

fn opt_exp(x: f64) -> Value {
    opt(x.exp())
}

fn overlay_svg(delta: &bootlab::variational::DeltaCurve, path: &[(f64, f64)]) -> String {
    let (y0, y1) = (delta.u_scaled.1, delta.v_scaled.1);
    let curve: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let y = y0 + (y1 - y0) * i as f64 / 100.0;
            (delta.x_log_of(y), y)
        })
        .collect();
    line_plot(
        "optimal staircase vs the trajectory curve",
        "ln x",
        "p y",
        &[("DP argmin", path.to_vec()), ("trajectory", curve)],
    )
}

fn paradox(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let rows = paradox_crossovers();
    let primary = match spec.format() {
        Format::Json => json_bytes(&json!({"command": "paradox", "crossovers": rows})),
        _ => {
            let mut s = String::from("name,t,log10_L,log10_log10_L,quoted_log10_L,description\n");
            for c in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},\"{}\"\n",
                    c.name,
                    c.t,
                    c.log10_l,
                    c.log10_log10_l,
                    csv_opt(c.quoted_log10_l),
                    c.description
                ));
            }
            s.into_bytes()
        }
    };
    Ok(RunOutput::new(primary, format!("paradox: {} crossovers", rows.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(command: CommandKind) -> ExperimentSpec {
        ExperimentSpec {
            command,
            ..Default::default()
        }
    }

    #[test]
    fn enumerate_pairs_gives_eight_shapes() {
        let out = run(&spec(CommandKind::Enumerate)).unwrap();
        let v: Value = serde_json::from_slice(&out.primary).unwrap();
        assert_eq!(v["count"], 8);
        assert_eq!(v["shapes"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn asymptotics_row_matches_library() {
        let s = ExperimentSpec {
            log_l: vec![1e6],
            ..spec(CommandKind::Asymptotics)
        };
        let out = String::from_utf8(run(&s).unwrap().primary).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        let cols: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[4], bootlab::asymptotics::pc_threeterm(1e6, 2).unwrap());
        assert_eq!(cols[5], invert_pc(1e6, 0.0).unwrap());
    }

    #[test]
    fn paradox_csv_has_every_crossover() {
        let out = String::from_utf8(run(&spec(CommandKind::Paradox)).unwrap().primary).unwrap();
        assert_eq!(out.lines().count(), 1 + paradox_crossovers().len());
    }

    #[test]
    fn error_codes() {
        let bad = ExperimentSpec {
            trials: 0,
            ..spec(CommandKind::Simulate)
        };
        assert_eq!(run(&bad).unwrap_err().exit_code(), 2);
        let compute = ExperimentSpec {
            p: 0.05,
            ..spec(CommandKind::Variational)
        };
        let e = run(&compute).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_json().contains("invalid-box"));
    }

    #[test]
    fn traverse_small_instance_reports_structure() {
        let s = ExperimentSpec {
            width: 6,
            height: 3,
            p: 0.5,
            seed: 3,
            ..spec(CommandKind::Traverse)
        };
        let v: Value = serde_json::from_slice(&run(&s).unwrap().primary).unwrap();
        assert_eq!(v["up_traversable"].as_bool().unwrap(), !v["minimal_set"].is_null());
    }
}
