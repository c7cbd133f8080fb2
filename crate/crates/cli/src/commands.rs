use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use culling::config::RunConfig;
use culling::dmc::run_dmc;
use culling::exact_diag::diag_sweep;
use culling::meanfield::variational_scan;
use culling::model::{ScheduleShape, ScheduleSpec};
use culling::scan::{adiabatic_analysis, culling_staircase, phase_diagram, Limit, PhaseOptions};
use culling::tonks::tonks_sweep;
use culling::{CullError, Method};

use crate::output::{sha256_hex, FileRecord, OutputDir};
use crate::{CullArgs, DmcArgs, Failure, PhaseArgs, SpectrumArgs, VariationalArgs};

pub struct Context {
    pub config_path: Option<PathBuf>,
    pub out: OutputDir,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config_path: Option<String>,
    output_dir: String,
    seed: Option<u64>,
    methods: Vec<&'static str>,
    grids: serde_json::Value,
    config: &'a RunConfig,
    files: &'a [FileRecord],
}

impl Context {
    fn finish(
        self,
        subcommand: &'static str,
        cfg: &RunConfig,
        seed: Option<u64>,
        methods: Vec<&'static str>,
        grids: serde_json::Value,
    ) -> Result<(), Failure> {
        let files = self.out.files().to_vec();
        let manifest = RunManifest {
            tool: "culling",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config_path: self.config_path.as_ref().map(|p| p.display().to_string()),
            output_dir: self.out.root().display().to_string(),
            seed,
            methods,
            grids,
            config: cfg,
            files: &files,
        };
        self.out.finish(&manifest)?;
        Ok(())
    }
}

fn bad(name: &'static str, reason: impl Into<String>) -> Failure {
    CullError::param(name, reason).into()
}

/// Well width and box size follow `[well]`; diag modes follow `[diag]`.
fn phase_options(cfg: &RunConfig, n_max: Option<usize>) -> PhaseOptions {
    let mut opts = cfg.phase.options;
    opts.width = cfg.well.width;
    opts.box_size = cfg.well.box_size;
    opts.diag.width = cfg.well.width;
    opts.diag.box_size = cfg.well.box_size;
    opts.diag.modes = cfg.diag.modes;
    opts.dmc.width = cfg.well.width;
    opts.dmc.box_size = cfg.well.box_size;
    if let Some(n) = n_max {
        opts.n_max = n;
    }
    opts
}

fn set_g(cfg: &mut RunConfig, g: Option<f64>) -> Result<(), Failure> {
    if let Some(g) = g {
        cfg.interaction.g = Some(g);
        cfg.interaction.scattering_length = None;
        cfg.interaction.transverse_width = None;
    }
    Ok(cfg.interaction_spec().map(|_| ())?)
}

pub fn spectrum(mut ctx: Context, mut cfg: RunConfig, a: SpectrumArgs) -> Result<(), Failure> {
    if let Some(m) = a.method {
        cfg.spectrum.method = m;
    }
    if let Some(n) = a.n_max {
        cfg.spectrum.n_max = n;
    }
    if let Some(e) = a.excitations {
        cfg.spectrum.excitations = e;
    }
    if let Some(m) = a.modes {
        cfg.diag.modes = m;
    }
    set_g(&mut cfg, a.g)?;
    if cfg.spectrum.n_max == 0 {
        return Err(bad("n_max", "need at least one particle"));
    }
    let well = cfg.well_spec()?;
    let g = cfg.interaction_spec()?.g;
    let depths = cfg.spectrum.depths.values();
    let s = &cfg.spectrum;
    match s.method {
        Method::Tonks => {
            let rows = tonks_sweep(&well, &depths, s.n_max, s.excitations)?;
            ctx.out.csv("levels.csv", "levels", &rows)?;
        }
        Method::Diag => {
            let rows = diag_sweep(&well, g, &depths, s.n_max, cfg.diag.modes, s.excitations + 1)?;
            ctx.out.csv("levels.csv", "levels", &rows)?;
        }
        other => {
            return Err(bad(
                "method",
                format!("spectrum supports tonks and diag, not {}", other.tag()),
            ))
        }
    }
    let grids = json!({ "depths": depths });
    let method = cfg.spectrum.method.tag();
    ctx.finish("spectrum", &cfg, None, vec![method], grids)
}

pub fn variational(mut ctx: Context, mut cfg: RunConfig, a: VariationalArgs) -> Result<(), Failure> {
    if let Some(n) = a.n {
        cfg.variational.n = n;
    }
    set_g(&mut cfg, a.g)?;
    let well = cfg.well_spec()?;
    let g = cfg.interaction_spec()?.g;
    let depths = cfg.variational.depths.values();
    let rows = variational_scan(cfg.variational.n, g, &well, &depths)?;
    ctx.out.csv("variational.csv", "variational", &rows)?;
    ctx.finish(
        "variational",
        &cfg,
        None,
        vec!["variational"],
        json!({ "depths": depths }),
    )
}

#[derive(Serialize)]
struct BoundaryRow<'a> {
    g: f64,
    n: usize,
    depth: f64,
    error: f64,
    method: &'static str,
    warning: &'a str,
}

pub fn phase(mut ctx: Context, mut cfg: RunConfig, a: PhaseArgs) -> Result<(), Failure> {
    if let Some(m) = a.method {
        cfg.phase.method = m;
    }
    if let Some(g) = a.g {
        cfg.phase.g = culling::config::Grid::List(g);
    }
    let opts = phase_options(&cfg, a.n_max);
    cfg.phase.options = opts;
    let g_grid = cfg.phase.g.values();
    let depths = cfg.phase.depths.values();
    let diagram = phase_diagram(&g_grid, &depths, cfg.phase.method, &opts)?;
    let rows: Vec<BoundaryRow> = diagram
        .boundary
        .points
        .iter()
        .map(|p| BoundaryRow {
            g: p.g,
            n: p.n,
            depth: p.depth,
            error: p.error,
            method: p.method.tag(),
            warning: p.warning.as_deref().unwrap_or(""),
        })
        .collect();
    ctx.out.csv("boundary.csv", "boundary", &rows)?;
    ctx.out.csv("regions.csv", "regions", &diagram.regions)?;
    let summary = json!({
        "method": diagram.method,
        "thresholds": diagram.boundary.points.len(),
        "skipped": diagram.skipped,
        "ordering_violations": diagram.boundary.violations(),
    });
    ctx.out.json("phase.json", &summary)?;
    let seed = (cfg.phase.method == Method::Dmc).then_some(opts.dmc.config.seed);
    let grids = json!({ "g": g_grid, "depths": depths });
    ctx.finish("phase", &cfg, seed, vec![cfg.phase.method.tag()], grids)
}

pub fn cull(mut ctx: Context, mut cfg: RunConfig, a: CullArgs) -> Result<(), Failure> {
    if let Some(m) = a.method {
        cfg.cull.method = m;
    }
    set_g(&mut cfg, a.g)?;
    if let Some(n) = a.n_target {
        cfg.cull.n_target = n;
    }
    if let Some(eta) = a.eta {
        cfg.cull.eta = eta;
    }
    if let Some(limit) = a.limit {
        cfg.cull.limit = match limit.as_str() {
            "tonks" => Limit::Tonks,
            "meanfield" => Limit::Meanfield,
            other => return Err(bad("limit", format!("expected tonks or meanfield, got `{other}`"))),
        };
    }
    if let Some(tau) = a.tau {
        cfg.cull.schedule = ScheduleSpec::exponential(cfg.cull.schedule.initial_depth, tau)?;
    }
    let opts = phase_options(&cfg, None);
    cfg.phase.options = opts;
    let g = cfg.interaction_spec()?.g;
    let path = cfg.cull.path.values();
    let c = &cfg.cull;

    let trace = culling_staircase(g, &path, c.method, &opts)?;
    ctx.out.csv("staircase.csv", "staircase", &trace.samples)?;
    let report = adiabatic_analysis(&c.schedule, c.n_target, g, c.limit, c.eta, cfg.well.width, c.samples)?;
    ctx.out.csv("stages.csv", "stages", &report.stages)?;
    ctx.out
        .csv("schedule_trace.csv", "schedule_trace", &report.trace.samples)?;
    let shape = match c.schedule.shape {
        ScheduleShape::Exponential { .. } => "exponential",
        ScheduleShape::Linear { .. } => "linear",
    };
    let summary = json!({
        "staircase_method": c.method,
        "staircase_non_increasing": trace.is_non_increasing(),
        "steps": trace.steps(),
        "limit": report.limit,
        "eta": report.eta,
        "n_target": report.n_target,
        "schedule": shape,
        "min_tau": report.min_tau,
        "recommended_stop_depth": report.recommended_stop_depth,
        "adiabatic": report.stages.iter().all(|s| s.adiabatic),
    });
    ctx.out.json("cull.json", &summary)?;
    let seed = (c.method == Method::Dmc).then_some(opts.dmc.config.seed);
    let methods = vec![c.method.tag(), "adiabatic"];
    ctx.finish("cull", &cfg, seed, methods, json!({ "path": path }))
}

#[derive(Serialize)]
struct BlockRow {
    block: usize,
    energy: f64,
    population: f64,
}

/// The run record plus a digest of the block energy and population history.
#[derive(Serialize)]
struct DmcRecord<'a> {
    #[serde(flatten)]
    result: &'a culling::dmc::DmcResult,
    history_sha256: String,
}

pub fn dmc(mut ctx: Context, mut cfg: RunConfig, a: DmcArgs) -> Result<(), Failure> {
    set_g(&mut cfg, a.g)?;
    if let Some(n) = a.n {
        cfg.dmc.n = n;
    }
    if let Some(d) = a.depth {
        cfg.well.depth = d;
    }
    let run = &mut cfg.dmc.run;
    if let Some(s) = a.seed {
        run.seed = s;
    }
    if let Some(w) = a.walkers {
        run.walkers = w;
    }
    if let Some(b) = a.blocks {
        run.blocks = b;
    }
    if let Some(s) = a.steps_per_block {
        run.steps_per_block = s;
    }
    if let Some(t) = a.time_step {
        run.time_step = t;
    }
    run.timestep_check |= a.timestep_check;
    let well = cfg.well_spec()?;
    let g = cfg.interaction_spec()?.g;
    let result = run_dmc(cfg.dmc.n, g, &well, &cfg.dmc.run)?;
    let skip = cfg.dmc.run.equilibration_blocks;
    let rows: Vec<BlockRow> = result
        .block_energies
        .iter()
        .enumerate()
        .map(|(i, &e)| BlockRow {
            block: i,
            energy: e,
            population: result.population_history.get(i + skip).copied().unwrap_or(f64::NAN),
        })
        .collect();
    ctx.out.csv("blocks.csv", "blocks", &rows)?;
    let history =
        serde_json::to_vec(&(&result.block_energies, &result.population_history)).map_err(std::io::Error::other)?;
    let record = DmcRecord {
        result: &result,
        history_sha256: sha256_hex(&history),
    };
    ctx.out.json("dmc.json", &record)?;
    let seed = Some(cfg.dmc.run.seed);
    ctx.finish("dmc", &cfg, seed, vec!["dmc"], json!({ "depth": cfg.well.depth }))
}
