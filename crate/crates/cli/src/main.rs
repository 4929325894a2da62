//! `transmode`: simulate traces, segment them, and inspect the results.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use transmode::metrics::daily_totals;
use transmode::model::{load_schedule, ModelError, ScheduleTrip};
use transmode::pipeline::{self, read_trace, write_trace, TraceError};
use transmode::simulate::{self, Scenario, SimulateError};
use transmode::store::{self, DailyTotalsStore, StoreError, UploadBackend, UploadReceipt, UserIdentity, WriteOptions};
use transmode::{transit, ActivityLabel, PipelineConfig, Segment, TransitNetwork};

#[derive(Parser)]
#[command(name = "transmode", version, about = "Transport-mode inference from location and activity traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace from a scenario file or a built-in journey.
    Simulate {
        /// Scenario JSON file.
        #[arg(conflicts_with = "preset", required_unless_present = "preset")]
        scenario: Option<PathBuf>,
        /// Built-in journey: journey1 .. journey5.
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Trace output; the bus/tram timetable goes next to it as
        /// `<out>.schedule.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment a trace and classify its vehicle segments.
    Process {
        trace: PathBuf,
        /// JSON file of pipeline settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `field=value` override of one pipeline setting; wins over --config.
        #[arg(long = "set", value_name = "FIELD=VALUE")]
        overrides: Vec<String>,
        /// Station database: a directory with stations.json and lines.json,
        /// or one stations file. Defaults to the bundled Barcelona network.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Bus/tram timetable JSON.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Segment file to write; the event log goes to `<out>.events.jsonl`.
        #[arg(long)]
        out: PathBuf,
        /// Offset from UTC of the written times, in seconds.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        utc_offset: i32,
    },
    /// Print calories and CO₂ saved for one daily segment file as CSV.
    Stats {
        segments: PathBuf,
        /// Body weight in kilograms.
        #[arg(long)]
        weight: f64,
        /// Also record the day in this per-day totals file.
        #[arg(long)]
        totals: Option<PathBuf>,
    },
    /// Convert a segment file to a GeoJSON FeatureCollection.
    ExportGeojson {
        segments: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Upload a daily segment file under the anonymous user id.
    Upload {
        segments: PathBuf,
        /// Directory root or http(s) base URL.
        #[arg(long)]
        dest: String,
        /// Where the user id is kept; created on first use.
        #[arg(long, default_value = ".user_id")]
        id_file: PathBuf,
        /// Day of the file (DD-MM-YYYY) when its name does not say.
        #[arg(long)]
        date: Option<String>,
    },
}

/// A failure with its exit code: 1 usage, 2 data, 3 I/O or network.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn data(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = if matches!(e, ModelError::Io { .. }) { 3 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let code = if matches!(e, StoreError::Io { .. } | StoreError::Upload { .. }) { 3 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SimulateError> for Failure {
    fn from(e: SimulateError) -> Self {
        data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            scenario,
            preset,
            seed,
            out,
        } => simulate_cmd(scenario.as_deref(), preset.as_deref(), seed, &out),
        Command::Process {
            trace,
            config,
            overrides,
            network,
            schedule,
            out,
            utc_offset,
        } => process_cmd(&trace, config.as_deref(), &overrides, network.as_deref(), schedule.as_deref(), &out, utc_offset),
        Command::Stats {
            segments,
            weight,
            totals,
        } => stats_cmd(&segments, weight, totals.as_deref()),
        Command::ExportGeojson { segments, out } => export_cmd(&segments, &out),
        Command::Upload {
            segments,
            dest,
            id_file,
            date,
        } => upload_cmd(&segments, &dest, &id_file, date.as_deref()),
    }
}

fn simulate_cmd(scenario: Option<&Path>, preset: Option<&str>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut scenario = match (scenario, preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
            Scenario::from_json(&text).map_err(|e| data(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => simulate::preset(name).map_err(|e| usage(e.to_string()))?,
        (None, None) => return Err(usage("give a scenario file or --preset")),
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let events = simulate::generate(&scenario)?;
    let mut file = File::create(out).map_err(|e| io(out, e))?;
    write_trace(&mut file, &events).map_err(|e| io(out, e))?;

    let schedule_path = sidecar(out, "schedule.json");
    let text = serde_json::to_string_pretty(&scenario.timetable()).expect("trips serialize");
    std::fs::write(&schedule_path, text).map_err(|e| io(&schedule_path, e))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<PipelineConfig, Failure> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io(p, e))?;
            serde_json::from_str::<Value>(&text).map_err(|e| data(format!("{}: {e}", p.display())))?
        }
        None => json!({}),
    };
    let fields = value
        .as_object_mut()
        .ok_or_else(|| data("config must be a JSON object"))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects FIELD=VALUE, got `{item}`")))?;
        let parsed: Value = serde_json::from_str(raw).map_err(|_| usage(format!("--set {key}: `{raw}` is not a number")))?;
        fields.insert(key.to_string(), parsed);
    }
    let config: PipelineConfig = serde_json::from_value(value).map_err(|e| data(format!("config: {e}")))?;
    config.validate()?;
    Ok(config)
}

fn process_cmd(
    trace: &Path,
    config: Option<&Path>,
    overrides: &[String],
    network: Option<&Path>,
    schedule: Option<&Path>,
    out: &Path,
    utc_offset: i32,
) -> Result<(), Failure> {
    let config = load_config(config, overrides)?;
    let network = match network {
        Some(p) => TransitNetwork::load(p)?,
        None => TransitNetwork::barcelona_fixture(),
    };
    let schedule: Vec<ScheduleTrip> = match schedule {
        Some(p) => load_schedule(p)?,
        None => Vec::new(),
    };
    let file = File::open(trace).map_err(|e| io(trace, e))?;
    let events = read_trace(BufReader::new(file)).map_err(|e| match e {
        TraceError::Parse { line, reason } => data(format!("{}:{line}: {reason}", trace.display())),
        TraceError::Io(e) => io(trace, e),
    })?;
    let output = pipeline::run(&events, &config, &network).map_err(|e| data(format!("{}: {e}", trace.display())))?;
    let segments = transit::post_process(output.segments, &schedule, &network, &config);

    store::write_segments_with(
        out,
        &segments,
        &WriteOptions {
            utc_offset_s: utc_offset,
            compact: false,
        },
    )?;
    let log_path = sidecar(out, "events.jsonl");
    let mut log = File::create(&log_path).map_err(|e| io(&log_path, e))?;
    for entry in &output.log {
        let line = serde_json::to_string(entry).expect("log entries serialize");
        writeln!(log, "{line}").map_err(|e| io(&log_path, e))?;
    }
    Ok(())
}

fn stats_cmd(path: &Path, weight: f64, totals: Option<&Path>) -> Result<(), Failure> {
    if !(weight.is_finite() && weight > 0.0) {
        return Err(usage(format!("--weight must be a positive number of kilograms, got {weight}")));
    }
    let segments = store::read_segments(path)?;
    let day = daily_totals(&segments, weight, &PipelineConfig::default());
    let date = store::date_from_file_name(path);
    if let Some(totals_path) = totals {
        let date = date.ok_or_else(|| data(format!("{}: file name does not start with DD-MM-YYYY", path.display())))?;
        let mut store = DailyTotalsStore::load(totals_path)?;
        store.set(date, day);
        store.save(totals_path)?;
    }
    let date_text = date.map(|d| d.format("%d-%m-%Y").to_string()).unwrap_or_default();
    println!("{}", store::CSV_HEADER);
    println!("{date_text},{},{}", day.kcal, day.co2_g);
    Ok(())
}

fn color(activity: ActivityLabel) -> &'static str {
    match activity {
        ActivityLabel::OnFoot => "#2e7d32",
        ActivityLabel::Bicycle => "#f9a825",
        ActivityLabel::Vehicle => "#6d4c41",
        ActivityLabel::Still => "#757575",
        ActivityLabel::Unknown => "#9e9e9e",
        ActivityLabel::Metro => "#c62828",
        ActivityLabel::Bus => "#1565c0",
        ActivityLabel::Tram => "#00838f",
        ActivityLabel::Train => "#6a1b9a",
    }
}

fn feature(seg: &Segment) -> Value {
    let coords: Vec<Value> = seg.location_points().iter().map(|p| json!([p.longitude, p.latitude])).collect();
    let geometry = if seg.activity() == ActivityLabel::Still || coords.len() == 1 {
        json!({"type": "Point", "coordinates": coords[0]})
    } else {
        json!({"type": "LineString", "coordinates": coords})
    };
    let mut properties = json!({
        "activity": seg.activity().as_str(),
        "color": color(seg.activity()),
        "distance_m": seg.total_distance(),
        "duration_s": seg.total_duration(),
        "speed_kmh": seg.average_speed(),
        "first_time": store::format_time(seg.first_location().timestamp_ms, 0),
        "last_time": store::format_time(seg.last_location().timestamp_ms, 0),
    });
    if let Some(line) = seg.line() {
        properties["line"] = json!(line);
    }
    json!({"type": "Feature", "geometry": geometry, "properties": properties})
}

fn export_cmd(path: &Path, out: &Path) -> Result<(), Failure> {
    let segments = store::read_segments(path)?;
    let collection = json!({
        "type": "FeatureCollection",
        "features": segments.iter().map(feature).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&collection).expect("GeoJSON serializes");
    std::fs::write(out, text).map_err(|e| io(out, e))
}

fn load_or_create_identity(path: &Path) -> Result<UserIdentity, Failure> {
    match std::fs::read_to_string(path) {
        Ok(text) => text
            .parse()
            .map_err(|e: StoreError| data(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let id = store::generate_identity_from_os()?;
            std::fs::write(path, format!("{id}\n")).map_err(|e| io(path, e))?;
            Ok(id)
        }
        Err(e) => Err(io(path, e)),
    }
}

fn upload_cmd(path: &Path, dest: &str, id_file: &Path, date: Option<&str>) -> Result<(), Failure> {
    let date = match date {
        Some(text) => store::parse_day(text).ok_or_else(|| usage(format!("--date `{text}` is not DD-MM-YYYY")))?,
        None => store::date_from_file_name(path)
            .ok_or_else(|| usage(format!("{}: name does not start with DD-MM-YYYY; pass --date", path.display())))?,
    };
    let backend = if dest.starts_with("http://") || dest.starts_with("https://") {
        UploadBackend::Http {
            base_url: dest.to_string(),
        }
    } else {
        UploadBackend::Directory(PathBuf::from(dest))
    };
    let id = load_or_create_identity(id_file)?;
    match store::upload(path, &id, date, &backend)? {
        UploadReceipt::Stored(p) => println!("stored {}", p.display()),
        UploadReceipt::Put { url, status } => println!("PUT {url} -> {status}"),
    }
    Ok(())
}
