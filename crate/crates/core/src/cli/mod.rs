//! Command-line front end.
//!
//! Exit status: 0 success, 1 the circuit is invalid, 2 lint findings
//! (`lint`, or `render --strict`), 3 I/O or configuration problems.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::convert::convert;
use crate::model::{Lint, Severity};
use crate::pipeline::{analyze, compile, CompileError};
use crate::render::{emit_json, emit_svg};
use crate::style::StyleSheet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_LINT: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Configuration file looked up in the working directory.
pub const RC_FILE: &str = ".qtkzrc.json";
/// Default stylesheet path when neither flag nor config names one.
pub const STYLES_ENV: &str = "QTKZ_STYLES";

#[derive(Debug, Parser)]
#[command(name = "qtkz", version, about = "Render, lint and convert quantikz circuit diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a circuit (or every .qtz file in a directory) to SVG or JSON.
    Render(CommonArgs),
    /// Report lints as `file:row:col CODE message`.
    Lint(CommonArgs),
    /// Translate QCircuit source into quantikz.
    Convert(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Input file or directory; standard input when omitted or `-`.
    input: Option<PathBuf>,
    /// Output file (or directory in batch mode); standard output otherwise.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Pixels per internal unit are 0.35 times this factor.
    #[arg(long, value_parser = positive)]
    scale: Option<f64>,
    /// JSON stylesheet: `{"styles": {"operator": {"fill": "red!20"}}}`.
    #[arg(long)]
    styles: Option<PathBuf>,
    /// Treat warning lints as errors (exit 2).
    #[arg(long)]
    strict: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Svg,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Svg => "svg",
            Format::Json => "json",
        }
    }
}

/// Contents of the configuration file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RcFile {
    output: Option<PathBuf>,
    format: Option<Format>,
    scale: Option<f64>,
    styles: Option<PathBuf>,
    #[serde(alias = "lint_as_errors")]
    strict: Option<bool>,
}

/// Settings after merging flags over the configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub scale: f64,
    pub styles: Option<PathBuf>,
    pub lint_as_errors: bool,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the tool. `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let mut io = Io { stdin, stdout, stderr };
    let (args, which) = match cli.command {
        Command::Render(a) => (a, Which::Render),
        Command::Lint(a) => (a, Which::Lint),
        Command::Convert(a) => (a, Which::Convert),
    };
    let cfg = match merge_config(args, Path::new(RC_FILE), std::env::var_os(STYLES_ENV).map(PathBuf::from)) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(io.stderr, "qtkz: {msg}");
            return EXIT_IO;
        }
    };
    match which {
        Which::Render => cmd_render(&cfg, &mut io),
        Which::Lint => cmd_lint(&cfg, &mut io),
        Which::Convert => cmd_convert(&cfg, &mut io),
    }
}

enum Which {
    Render,
    Lint,
    Convert,
}

fn merge_config(args: CommonArgs, rc_path: &Path, env_styles: Option<PathBuf>) -> Result<RunConfig, String> {
    let rc = match std::fs::read_to_string(rc_path) {
        Ok(text) => serde_json::from_str::<RcFile>(&text).map_err(|e| format!("{}: {e}", rc_path.display()))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => RcFile::default(),
        Err(e) => return Err(format!("{}: {e}", rc_path.display())),
    };
    let scale = args.scale.or(rc.scale).unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(format!("scale must be positive, got {scale}"));
    }
    Ok(RunConfig {
        input: args.input.filter(|p| p.as_os_str() != "-"),
        output: args.output.or(rc.output),
        format: args.format.or(rc.format).unwrap_or(Format::Svg),
        scale,
        styles: args.styles.or(rc.styles).or(env_styles),
        lint_as_errors: args.strict || rc.strict.unwrap_or(false),
    })
}

fn load_sheet(path: Option<&Path>, stderr: &mut dyn Write) -> Result<StyleSheet, i32> {
    let Some(path) = path else {
        return Ok(StyleSheet::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(stderr, "qtkz: {}: {e}", path.display());
        EXIT_IO
    })?;
    let sheet = StyleSheet::from_json(&text).map_err(|e| {
        let _ = writeln!(stderr, "qtkz: {}: {e}", path.display());
        EXIT_IO
    })?;
    for k in &sheet.unknown {
        let _ = writeln!(stderr, "{}: warning: unknown style key {k}", path.display());
    }
    Ok(sheet)
}

/// `foo.styles.json` next to `foo.qtz`, merged over the global sheet.
/// `base` with `<stem>.styles.json` next to `input` merged on top, if present.
pub fn sidecar_sheet(input: &Path, base: &StyleSheet) -> Result<StyleSheet, String> {
    let side = input.with_extension("styles.json");
    match std::fs::read_to_string(&side) {
        Ok(text) => {
            let mut sheet = base.clone();
            sheet.merge_json(&text).map_err(|e| format!("{}: {e}", side.display()))?;
            Ok(sheet)
        }
        Err(_) => Ok(base.clone()),
    }
}

fn read_input(cfg: &RunConfig, io: &mut Io) -> Result<(String, String), i32> {
    match &cfg.input {
        Some(p) => std::fs::read_to_string(p).map(|t| (p.display().to_string(), t)).map_err(|e| {
            let _ = writeln!(io.stderr, "qtkz: {}: {e}", p.display());
            EXIT_IO
        }),
        None => {
            let mut s = String::new();
            io.stdin.read_to_string(&mut s).map_err(|e| {
                let _ = writeln!(io.stderr, "qtkz: <stdin>: {e}");
                EXIT_IO
            })?;
            Ok(("<stdin>".to_string(), s))
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn format_lint(name: &str, l: &Lint) -> String {
    format!("{name}:{}:{} {} {}", l.row.unwrap_or(0), l.col.unwrap_or(0), l.code, l.message)
}

fn format_error(name: &str, src: &str, e: &CompileError) -> String {
    format!("{name}:{}: error: {e}", e.location(src))
}

/// Outcome of rendering one source: output text, messages, exit status.
struct Rendered {
    output: Option<String>,
    messages: Vec<String>,
    status: i32,
}

fn render_one(name: &str, src: &str, sheet: &StyleSheet, cfg: &RunConfig) -> Rendered {
    match compile(src, sheet) {
        Err(e) => Rendered { output: None, messages: vec![format_error(name, src, &e)], status: EXIT_INVALID },
        Ok(c) => {
            let mut messages: Vec<String> = c.lints.iter().map(|l| format_lint(name, l)).collect();
            for d in &c.notes {
                messages.push(format!("{name}: note: {d}"));
            }
            let warned = c.lints.iter().any(|l| l.severity == Severity::Warning);
            let status = if cfg.lint_as_errors && warned { EXIT_LINT } else { EXIT_OK };
            let output = match cfg.format {
                Format::Svg => emit_svg(&c.scene, cfg.scale),
                Format::Json => emit_json(&c.scene) + "\n",
            };
            Rendered { output: Some(output), messages, status }
        }
    }
}

fn qtz_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "qtz"))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_render(cfg: &RunConfig, io: &mut Io) -> i32 {
    let sheet = match load_sheet(cfg.styles.as_deref(), io.stderr) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(dir) = cfg.input.as_deref().filter(|p| p.is_dir()) {
        return render_batch(dir, &sheet, cfg, io);
    }
    let (name, src) = match read_input(cfg, io) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let sheet = match cfg.input.as_deref().map(|p| sidecar_sheet(p, &sheet)).transpose() {
        Ok(s) => s.unwrap_or(sheet),
        Err(msg) => {
            let _ = writeln!(io.stderr, "qtkz: {msg}");
            return EXIT_IO;
        }
    };
    let r = render_one(&name, &src, &sheet, cfg);
    for m in &r.messages {
        let _ = writeln!(io.stderr, "{m}");
    }
    let Some(out) = r.output else {
        return r.status;
    };
    let written = match &cfg.output {
        Some(path) => write_atomic(path, out.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => io.stdout.write_all(out.as_bytes()).map_err(|e| format!("<stdout>: {e}")),
    };
    match written {
        Ok(()) => r.status,
        Err(msg) => {
            let _ = writeln!(io.stderr, "qtkz: {msg}");
            EXIT_IO
        }
    }
}

fn render_batch(dir: &Path, sheet: &StyleSheet, cfg: &RunConfig, io: &mut Io) -> i32 {
    let files = match qtz_files(dir) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(io.stderr, "qtkz: {}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    let out_dir = cfg.output.clone().unwrap_or_else(|| dir.to_path_buf());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        let _ = writeln!(io.stderr, "qtkz: {}: {e}", out_dir.display());
        return EXIT_IO;
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(files.len().max(1));
    let chunk = files.len().div_ceil(workers).max(1);
    let results: Vec<(Vec<String>, i32)> = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .chunks(chunk)
            .map(|part| {
                let out_dir = &out_dir;
                s.spawn(move || part.iter().map(|f| render_file(f, out_dir, sheet, cfg)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("render worker panicked")).collect()
    });
    let mut status = EXIT_OK;
    for (messages, code) in results {
        for m in messages {
            let _ = writeln!(io.stderr, "{m}");
        }
        status = status.max(code);
    }
    status
}

fn render_file(file: &Path, out_dir: &Path, sheet: &StyleSheet, cfg: &RunConfig) -> (Vec<String>, i32) {
    let name = file.display().to_string();
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => return (vec![format!("qtkz: {name}: {e}")], EXIT_IO),
    };
    let sheet = match sidecar_sheet(file, sheet) {
        Ok(s) => s,
        Err(msg) => return (vec![format!("qtkz: {msg}")], EXIT_IO),
    };
    let r = render_one(&name, &src, &sheet, cfg);
    let mut messages = r.messages;
    let Some(out) = r.output else {
        return (messages, r.status);
    };
    let stem = file.file_stem().unwrap_or_default();
    let target = out_dir.join(stem).with_extension(cfg.format.extension());
    if let Err(e) = write_atomic(&target, out.as_bytes()) {
        messages.push(format!("qtkz: {}: {e}", target.display()));
        return (messages, EXIT_IO);
    }
    (messages, r.status)
}

fn lint_source(name: &str, src: &str, out: &mut dyn Write) -> i32 {
    match analyze(src) {
        Err(e) => {
            let _ = writeln!(out, "{}", format_error(name, src, &e));
            EXIT_INVALID
        }
        Ok((_, lints)) => {
            for l in &lints {
                let _ = writeln!(out, "{}", format_lint(name, l));
            }
            if lints.iter().any(|l| l.severity == Severity::Warning) {
                EXIT_LINT
            } else {
                EXIT_OK
            }
        }
    }
}

fn cmd_lint(cfg: &RunConfig, io: &mut Io) -> i32 {
    if let Some(dir) = cfg.input.as_deref().filter(|p| p.is_dir()) {
        let files = match qtz_files(dir) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(io.stderr, "qtkz: {}: {e}", dir.display());
                return EXIT_IO;
            }
        };
        let mut status = EXIT_OK;
        for f in files {
            let code = match std::fs::read_to_string(&f) {
                Ok(src) => lint_source(&f.display().to_string(), &src, io.stdout),
                Err(e) => {
                    let _ = writeln!(io.stderr, "qtkz: {}: {e}", f.display());
                    EXIT_IO
                }
            };
            status = status.max(code);
        }
        return status;
    }
    match read_input(cfg, io) {
        Ok((name, src)) => lint_source(&name, &src, io.stdout),
        Err(code) => code,
    }
}

fn cmd_convert(cfg: &RunConfig, io: &mut Io) -> i32 {
    let (name, src) = match read_input(cfg, io) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let conv = convert(&src);
    for n in &conv.notes {
        let _ = writeln!(io.stderr, "{name}: note: {n}");
    }
    let text = if conv.text.ends_with('\n') { conv.text } else { conv.text + "\n" };
    let written = match &cfg.output {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => io.stdout.write_all(text.as_bytes()).map_err(|e| format!("<stdout>: {e}")),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(msg) => {
            let _ = writeln!(io.stderr, "qtkz: {msg}");
            EXIT_IO
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> CommonArgs {
        let mut v = vec!["qtkz", "render"];
        v.extend_from_slice(extra);
        match Cli::try_parse_from(v).unwrap().command {
            Command::Render(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let rc = dir.path().join(RC_FILE);
        std::fs::write(&rc, r#"{"format": "json", "scale": 2, "styles": "a.json", "strict": true}"#).unwrap();
        let cfg = merge_config(args(&["--scale", "3"]), &rc, Some("env.json".into())).unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.scale, 3.0);
        assert_eq!(cfg.styles, Some(PathBuf::from("a.json")));
        assert!(cfg.lint_as_errors);
        let none = dir.path().join("missing.json");
        let cfg = merge_config(args(&["x.qtz"]), &none, Some("env.json".into())).unwrap();
        assert_eq!((cfg.format, cfg.scale, cfg.lint_as_errors), (Format::Svg, 1.0, false));
        assert_eq!(cfg.styles, Some(PathBuf::from("env.json")));
        assert_eq!(cfg.input, Some(PathBuf::from("x.qtz")));
    }

    #[test]
    fn bad_config_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rc = dir.path().join(RC_FILE);
        std::fs::write(&rc, r#"{"colour": "red"}"#).unwrap();
        assert!(merge_config(args(&[]), &rc, None).is_err());
        std::fs::write(&rc, r#"{"scale": -1}"#).unwrap();
        assert!(merge_config(args(&[]), &rc, None).is_err());
        assert!(Cli::try_parse_from(["qtkz", "render", "--scale", "0"]).is_err());
    }

    #[test]
    fn stdin_to_stdout() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut input: &[u8] = br"\gate{H} & \qw";
        let code = run(["qtkz", "render", "--format", "json"], &mut input, &mut out, &mut err);
        assert_eq!(code, EXIT_OK, "{}", String::from_utf8_lossy(&err));
        assert!(String::from_utf8(out).unwrap().starts_with("{\"baseline\""));
    }

    #[test]
    fn lint_line_format() {
        let mut out = Vec::new();
        let code = lint_source("f.qtz", r"\gate{H} & \meter", &mut out);
        assert_eq!(code, EXIT_LINT);
        assert!(String::from_utf8(out).unwrap().starts_with("f.qtz:1:2 L1 "));
    }
}
