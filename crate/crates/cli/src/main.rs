//! `tmbwifi`: fit, evaluate and query indoor 5 GHz path loss and rate models.
//!
//! Exit status is 0 on success, 1 on a data or domain error and 2 on a usage
//! error (clap's own code for malformed flags).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wifi_pathloss::fitting::fit_full;
use wifi_pathloss::measurements::{
    aggregate_path_loss, aggregate_path_loss_by_config, channel_variance, grid_variance,
    parse_capture, time_variance, write_capture, LocationRegistry, PacketRecord, VarianceReport,
    SHADOWING_SIGMA_DB,
};
use wifi_pathloss::pathloss::{evaluate, LinkGeometry, ModelId, PathLossError, PathLossParams};
use wifi_pathloss::rate::reference::reference_table;
use wifi_pathloss::rate::{build_table, GuardInterval, McsDistributionTable, RatePrediction};
use wifi_pathloss::synthetic::{capture_records, CampaignConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "tmbwifi",
    version,
    about = "Indoor WiFi path loss and rate prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model at one geometry
    Eval(EvalArgs),
    /// Tabulate models over a distance range (CSV)
    Curve(CurveArgs),
    /// Fit model parameters to packet captures
    Fit(FitArgs),
    /// Validate captures and write them back in canonical form
    Ingest(IngestArgs),
    /// Signal stability statistics over captures
    Variance(VarianceArgs),
    /// Build the RSSI-binned MCS distribution table (CSV)
    McsTable(McsTableArgs),
    /// Predict RSSI, MCS distribution and PHY rate
    Predict(PredictArgs),
    /// Export the embedded office testbed registry (CSV)
    RegistryExport(OutArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Overrides on top of the default (or `--params` file) parameter set.
#[derive(Args, Default)]
struct ParamArgs {
    /// Parameter document (`key = value` lines)
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    l0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Wall attenuation, dB per wall
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Mean wall density, walls per metre
    #[arg(long, allow_hyphen_values = true)]
    wbar: Option<f64>,
    /// Carrier frequency, GHz
    #[arg(long, allow_hyphen_values = true)]
    fc: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n_itu: Option<f64>,
    /// ITU floor penetration loss, dB
    #[arg(long, allow_hyphen_values = true)]
    lf: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<PathLossParams> {
        let mut p = match &self.params {
            Some(path) => PathLossParams::from_text(&read(path)?)
                .with_context(|| format!("--params {}", path.display()))?,
            None => PathLossParams::default(),
        };
        let overrides = [
            ("l0_db", self.l0),
            ("gamma", self.gamma),
            ("k_db_per_wall", self.k),
            ("wbar_walls_per_m", self.wbar),
            ("fc_ghz", self.fc),
            ("n_itu", self.n_itu),
            ("lf_itu_db", self.lf),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                p.set(key, v);
            }
        }
        p.validate().map_err(|e| match e {
            PathLossError::Param { name, .. } => anyhow!("{} ({e})", param_flag(name)),
            other => other.into(),
        })?;
        Ok(p)
    }
}

fn param_flag(key: &str) -> &'static str {
    match key {
        "l0_db" => "--l0",
        "gamma" => "--gamma",
        "k_db_per_wall" => "--k",
        "wbar_walls_per_m" => "--wbar",
        "fc_ghz" => "--fc",
        "n_itu" => "--n-itu",
        _ => "--lf",
    }
}

#[derive(Args)]
struct GeometryArgs {
    /// Walls crossed by the direct path
    #[arg(long, default_value_t = 0)]
    walls: u32,
    /// Floors crossed by the direct path
    #[arg(long, default_value_t = 0)]
    floors: u32,
}

impl GeometryArgs {
    fn at(&self, d: f64) -> Result<LinkGeometry> {
        Ok(LinkGeometry::new(d, self.walls)
            .context("--d")?
            .with_floors(self.floors))
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: ModelId,
    /// AP-STA distance, m
    #[arg(long)]
    d: f64,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Transmit power, dBm; also prints the predicted RSSI
    #[arg(long, allow_hyphen_values = true)]
    ptx: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
}

/// `start:stop:step`, inclusive of `stop` when it lies on the grid.
#[derive(Debug, Clone, Copy)]
struct DistanceRange {
    start: f64,
    stop: f64,
    step: f64,
}

impl DistanceRange {
    fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn parse_range(s: &str) -> Result<DistanceRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{v}` is not a number"))
    };
    let r = DistanceRange {
        start: num(start)?,
        stop: num(stop)?,
        step: num(step)?,
    };
    if !(r.start > 0.0 && r.start.is_finite() && r.stop.is_finite()) {
        return Err("start must be a positive distance".into());
    }
    if r.stop <= r.start {
        return Err(format!("stop {} must exceed start {}", r.stop, r.start));
    }
    if !(r.step > 0.0 && r.step.is_finite()) {
        return Err("step must be positive".into());
    }
    if (r.stop - r.start) / r.step > 1e6 {
        return Err("too many points".into());
    }
    Ok(r)
}

#[derive(Args)]
struct CurveArgs {
    /// Models to tabulate, comma separated (default: all)
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelId>,
    /// Distance grid `start:stop:step` in metres
    #[arg(long, value_parser = parse_range, default_value = "1:25:1", conflicts_with = "registry")]
    d: DistanceRange,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Evaluate at the locations of this registry instead of a distance grid
    #[arg(long)]
    registry: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CaptureArgs {
    /// Capture CSV file; repeat for several files
    #[arg(long = "captures")]
    captures: Vec<PathBuf>,
    /// Generate a seeded synthetic campaign instead of reading captures
    #[arg(long, conflicts_with = "captures")]
    synthetic: bool,
    #[arg(long, default_value_t = DEFAULT_SEED, requires = "synthetic")]
    seed: u64,
    /// Location registry CSV (default: embedded office testbed)
    #[arg(long)]
    registry: Option<PathBuf>,
}

impl CaptureArgs {
    fn registry(&self) -> Result<LocationRegistry> {
        match &self.registry {
            Some(path) => LocationRegistry::parse_csv(open(path)?)
                .with_context(|| format!("--registry {}", path.display())),
            None => Ok(LocationRegistry::reference()),
        }
    }

    fn load(&self, registry: &LocationRegistry) -> Result<Vec<PacketRecord>> {
        if self.synthetic {
            let p = PathLossParams::default();
            return Ok(capture_records(
                &p,
                registry,
                &CampaignConfig::default(),
                self.seed,
            ));
        }
        if self.captures.is_empty() {
            bail!("no input: pass --captures <file> or --synthetic");
        }
        let mut records = Vec::new();
        for path in &self.captures {
            let cap = parse_capture(open(path)?)
                .with_context(|| format!("--captures {}", path.display()))?;
            eprintln!("{}: {}", path.display(), cap.summary());
            for row in &cap.rejected {
                eprintln!("  rejected {row}");
            }
            records.extend(cap.records);
        }
        Ok(records)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: CaptureArgs,
    /// Write the k search as `k_db_per_wall,rmse_db` CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the report here; the summary table then goes to standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: CaptureArgs,
    /// Write per-location path loss samples instead of packet records
    #[arg(long)]
    path_loss: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VarianceArgs {
    #[command(flatten)]
    input: CaptureArgs,
    /// Channel the per-channel deltas are taken against
    #[arg(long, default_value_t = 36)]
    reference_channel: u16,
    /// `point_id,center_id` CSV assigning grid points to their centres
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Flag statistics above this magnitude, dB
    #[arg(long, default_value_t = SHADOWING_SIGMA_DB)]
    threshold: f64,
    /// Keep only records at this bandwidth, MHz
    #[arg(long)]
    bw: Option<u16>,
    /// Keep only records at this transmit power, dBm
    #[arg(long, allow_hyphen_values = true)]
    ptx: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct McsTableArgs {
    /// Capture CSV file; repeat for several files
    #[arg(long = "captures", required_unless_present = "reference")]
    captures: Vec<PathBuf>,
    /// Emit the embedded reference table
    #[arg(long, conflicts_with = "captures")]
    reference: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("where").required(true).args(["rssi", "d"]))]
struct PredictArgs {
    /// Received power, dBm
    #[arg(long, allow_hyphen_values = true)]
    rssi: Option<f64>,
    /// AP-STA distance, m (RSSI comes from the path loss model)
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value = "tmb")]
    model: ModelId,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Channel bandwidth, MHz
    #[arg(long)]
    bw: u16,
    /// Transmit power, dBm
    #[arg(long, allow_hyphen_values = true)]
    ptx: f64,
    #[arg(long, default_value = "long")]
    guard: GuardInterval,
    /// Distribution table CSV (default: embedded reference table)
    #[arg(long, conflicts_with = "captures")]
    table: Option<PathBuf>,
    /// Build the table from these captures
    #[arg(long = "captures")]
    captures: Vec<PathBuf>,
    /// Also list the full MCS distribution
    #[arg(long)]
    full: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => io::stdout().write_all(text.as_bytes()).context("stdout"),
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let geom = args.geometry.at(args.d)?;
    let pl = evaluate(args.model, &geom, &params)?;
    let mut line = format!("model={} d={:.3} m PL={:.3} dB", args.model, args.d, pl);
    if let Some(ptx) = args.ptx {
        line.push_str(&format!(" RSSI={:.3} dBm", ptx - pl));
    }
    println!("{line}");
    Ok(())
}

fn models_or_all(models: &[ModelId]) -> Vec<ModelId> {
    if models.is_empty() {
        ModelId::ALL.to_vec()
    } else {
        models.to_vec()
    }
}

fn cmd_curve(args: &CurveArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let models = models_or_all(&args.models);
    let names: Vec<&str> = models.iter().map(|m| m.name()).collect();
    let mut out = String::new();
    let row = |geom: &LinkGeometry| -> Result<String> {
        let mut cols = Vec::with_capacity(models.len());
        for &m in &models {
            cols.push(format!("{:.3}", evaluate(m, geom, &params)?));
        }
        Ok(cols.join(","))
    };
    if let Some(path) = &args.registry {
        let registry = LocationRegistry::parse_csv(open(path)?)
            .with_context(|| format!("--registry {}", path.display()))?;
        out.push_str(&format!("location_id,d_m,walls,{}\n", names.join(",")));
        for (id, geom) in registry.iter() {
            out.push_str(&format!(
                "{id},{:.3},{},{}\n",
                geom.distance_m,
                geom.walls,
                row(geom)?
            ));
        }
    } else {
        out.push_str(&format!("d_m,{}\n", names.join(",")));
        for d in args.d.points() {
            out.push_str(&format!("{d:.3},{}\n", row(&args.geometry.at(d)?)?));
        }
    }
    emit(&args.out.out, &out)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let registry = args.input.registry()?;
    let records = args.input.load(&registry)?;
    let samples =
        aggregate_path_loss_by_config(&records, &registry).context("aggregation step failed")?;
    let report = fit_full(&samples)?;
    if let Some(path) = &args.trace {
        fs::write(path, report.trace_csv())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    match &args.out {
        Some(path) => {
            fs::write(path, report.to_text())
                .with_context(|| format!("cannot write {}", path.display()))?;
            print!("{}", report.summary());
        }
        None => {
            print!("{}", report.to_text());
            eprint!("{}", report.summary());
        }
    }
    Ok(())
}

fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let registry = args.input.registry()?;
    let records = args.input.load(&registry)?;
    let text = if args.path_loss {
        let mut s = String::from("location_id,distance_m,walls,pl_db\n");
        for p in aggregate_path_loss(&records, &registry)? {
            s.push_str(&format!(
                "{},{:.3},{},{:.3}\n",
                p.location_id, p.geom.distance_m, p.geom.walls, p.pl_db
            ));
        }
        s
    } else {
        aggregate_path_loss(&records, &registry)?;
        write_capture(&records)
    };
    eprintln!("{} record(s) ingested", records.len());
    emit(&args.out.out, &text)
}

fn read_grid(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in read(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("point_id")) {
            continue;
        }
        let (point, center) = line.split_once(',').ok_or_else(|| {
            anyhow!(
                "--grid {} line {}: expected point_id,center_id",
                path.display(),
                i + 1
            )
        })?;
        map.insert(point.trim().to_string(), center.trim().to_string());
    }
    Ok(map)
}

fn cmd_variance(args: &VarianceArgs) -> Result<()> {
    let registry = args.input.registry()?;
    let mut records = args.input.load(&registry)?;
    records.retain(|r| {
        args.bw.is_none_or(|bw| r.bw_mhz == bw) && args.ptx.is_none_or(|p| r.ptx_dbm == p)
    });
    if records.is_empty() {
        bail!("no records left after the --bw/--ptx filter");
    }
    let configs: BTreeSet<(u16, u64)> = records
        .iter()
        .map(|r| (r.bw_mhz, r.ptx_dbm.to_bits()))
        .collect();
    if configs.len() > 1 {
        eprintln!(
            "warning: statistics pool {} AP configurations; select one with --bw and --ptx",
            configs.len()
        );
    }
    let time = time_variance(&records);
    for id in &time.skipped {
        eprintln!("location {id}: fewer than two records, no time statistic");
    }
    let multi_channel = records.iter().any(|r| r.channel != records[0].channel);
    let report = VarianceReport {
        per_location_std_db: time.std_db,
        grid_max_abs_diff_db: match &args.grid {
            Some(path) => grid_variance(&records, &read_grid(path)?)?,
            None => BTreeMap::new(),
        },
        per_channel_delta_db: if multi_channel {
            channel_variance(&records, args.reference_channel)?
        } else {
            BTreeMap::new()
        },
    };
    for e in report.exceeding(args.threshold) {
        eprintln!(
            "above {:.3} dB: {} at {} = {:.3} dB",
            args.threshold,
            e.kind.name(),
            e.location,
            e.value_db
        );
    }
    emit(&args.out.out, &report.to_csv())
}

fn table_from_captures(paths: &[PathBuf]) -> Result<McsDistributionTable> {
    let mut records = Vec::new();
    for path in paths {
        let cap =
            parse_capture(open(path)?).with_context(|| format!("--captures {}", path.display()))?;
        eprintln!("{}: {}", path.display(), cap.summary());
        records.extend(cap.records);
    }
    let table = build_table(&records)?;
    if table.out_of_range > 0 || table.excluded > 0 {
        eprintln!(
            "{} record(s) outside the RSSI range, {} with an invalid rate combination",
            table.out_of_range, table.excluded
        );
    }
    Ok(table)
}

fn cmd_mcs_table(args: &McsTableArgs) -> Result<()> {
    let table = if args.reference {
        reference_table()
    } else {
        table_from_captures(&args.captures)?
    };
    emit(&args.out.out, &table.to_csv())
}

fn prediction_text(p: &RatePrediction, full: bool) -> String {
    let mut s = format!(
        "RSSI {:.3} dBm, bin {}, {} MHz, {} dBm\nmode {}\nexpected PHY rate {:.3} Mbit/s ({} GI)\n",
        p.rssi_dbm,
        p.bin,
        p.bw_mhz,
        p.ptx_dbm,
        p.mode_label(),
        p.expected_phy_rate_mbps,
        p.guard
    );
    if let Some(b) = p.borrowed_from {
        s.push_str(&format!(
            "bin {} has no data; distribution borrowed from bin {}\n",
            p.bin, b
        ));
    }
    if full {
        s.push_str("mcs,nss,percent\n");
        for share in &p.distribution {
            s.push_str(&format!(
                "{},{},{:.2}\n",
                share.mcs,
                share.nss,
                100.0 * share.probability
            ));
        }
    }
    s
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let table = match &args.table {
        Some(path) => McsDistributionTable::from_csv(open(path)?)
            .with_context(|| format!("--table {}", path.display()))?,
        None if !args.captures.is_empty() => table_from_captures(&args.captures)?,
        None => reference_table(),
    };
    let prediction = match (args.rssi, args.d) {
        (Some(rssi), _) => table.query_by_rssi(rssi, args.bw, args.ptx, args.guard)?,
        (None, Some(d)) => {
            let params = args.params.resolve()?;
            let geom = args.geometry.at(d)?;
            table.query_by_distance(args.model, &params, &geom, args.bw, args.ptx, args.guard)?
        }
        (None, None) => unreachable!("clap requires --rssi or --d"),
    };
    let text = match args.format {
        Format::Text => prediction_text(&prediction, args.full),
        Format::Csv => format!("{}\n{}\n", RatePrediction::CSV_HEADER, prediction.csv_row()),
    };
    emit(&args.out.out, &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Curve(a) => cmd_curve(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Variance(a) => cmd_variance(&a),
        Command::McsTable(a) => cmd_mcs_table(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::RegistryExport(a) => emit(&a.out, &LocationRegistry::reference().to_csv()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
