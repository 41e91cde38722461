//! Command line surface: input and output formats, instance generation, the check
//! suites, SVG plotting, and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact_geometry::{
    classify_region, format_rational, parse_rational, Coord, ExtRational, Region, StripPoint, Q,
};
use crate::field_linalg::Field;
use crate::interleave::{interleaving_check, sup_distance, InterleaveReport};
use crate::plc::{PLComplex, DEFAULT_SIMPLEX_CAP};
use crate::risc_builder::{barcode_of, evaluate, Bar, BuildError, BuildOptions};
use crate::strip_module::{Counterexample, Diagram, DiagramPoint, GridModule, ModuleDump};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// An exact value: a JSON integer or a string `p/q`, integer, or decimal. JSON floats
/// are rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactValue(pub Q);

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        let raw = Raw::deserialize(d)
            .map_err(|_| serde::de::Error::custom("values must be integers or exact strings such as \"3/2\""))?;
        match raw {
            Raw::Int(i) => Ok(ExactValue(Q::from_integer(i.into()))),
            Raw::Str(s) => parse_rational(&s).map(ExactValue).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: i64,
    pub value: ExactValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_g: Option<ExactValue>,
}

fn default_field() -> u32 {
    2
}

/// A complex with one or two vertex functions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    #[serde(default = "default_field")]
    pub field: u32,
    pub vertices: Vec<VertexEntry>,
    pub simplices: Vec<Vec<i64>>,
}

impl ComplexFile {
    pub fn has_second_function(&self) -> bool {
        !self.vertices.is_empty() && self.vertices.iter().all(|v| v.value_g.is_some())
    }

    /// The complex with `f` as function 0 and, if present, `g` as function 1.
    pub fn to_complex(&self) -> Result<PLComplex, CliError> {
        let some_g = self.vertices.iter().filter(|v| v.value_g.is_some()).count();
        if some_g != 0 && some_g != self.vertices.len() {
            return Err(CliError::Input("value_g must be given for all vertices or none".into()));
        }
        let ids: Vec<i64> = self.vertices.iter().map(|v| v.id).collect();
        let mut values = vec![self.vertices.iter().map(|v| v.value.0.clone()).collect::<Vec<Q>>()];
        if self.has_second_function() {
            values.push(self.vertices.iter().map(|v| v.value_g.clone().unwrap().0).collect());
        }
        PLComplex::new(&ids, values, &self.simplices).map_err(|e| CliError::Build(e.into()))
    }

    fn from_values(ids: &[i64], f: &[Q], g: Option<&[Q]>, simplices: Vec<Vec<i64>>) -> ComplexFile {
        let vertices = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| VertexEntry {
                id,
                value: ExactValue(f[i].clone()),
                value_g: g.map(|g| ExactValue(g[i].clone())),
            })
            .collect();
        ComplexFile { field: 2, vertices, simplices }
    }
}

/// A serialized diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramFile {
    pub field: u32,
    pub points: Vec<DiagramPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarcodeFile {
    pub field: u32,
    pub bars: Vec<Bar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Exactness,
    Continuity,
    Decomposition,
    Yoneda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Hood,
    FlattenedHood,
    Circle,
    Cone,
    Random,
}

#[derive(Debug, Parser)]
#[command(name = "risc", version, about = "Relative interlevel set cohomology of PL functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    /// Prime field for coefficients; overrides the input file.
    #[arg(long)]
    pub field: Option<u32>,
    /// Output path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the extended persistence diagram.
    Dgm {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compute the level set barcode.
    Barcode {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run checks on a complex or on a module dump.
    Check {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Check the interleaving of the two functions of a complex.
    Interleave {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// `auto` for sup |f - g|, or an exact rational.
        #[arg(long, default_value = "auto")]
        delta: String,
    },
    /// Render a diagram file as SVG.
    Plot {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an input complex.
    Gen {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated vertex values replacing the preset's values for `f`.
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io(path.to_path_buf(), e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn load_complex(path: &Path) -> Result<ComplexFile, CliError> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn options(file_field: u32, flag: Option<u32>) -> Result<BuildOptions, CliError> {
    let p = flag.unwrap_or(file_field);
    let field = Field::new(p).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(BuildOptions { field, cap: DEFAULT_SIMPLEX_CAP })
}

/// The annotated diagram of `f` for a complex file.
pub fn diagram_of(file: &ComplexFile, field: Option<u32>) -> Result<DiagramFile, CliError> {
    let opts = options(file.field, field)?;
    let k = file.to_complex()?.with_function(0);
    let r = evaluate(&k, 0, &opts)?;
    Ok(DiagramFile { field: opts.field.p, points: r.diagram.points })
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with columns `degree, region, pair_lo, pair_hi, ls_lo, ls_lo_closed, ls_hi,
/// ls_hi_closed, multiplicity, x_k, x_v, y_k, y_v`.
pub fn diagram_csv(d: &DiagramFile) -> String {
    let mut s = String::from("degree,region,pair_lo,pair_hi,ls_lo,ls_lo_closed,ls_hi,ls_hi_closed,multiplicity,x_k,x_v,y_k,y_v\n");
    for p in &d.points {
        let (plo, phi) = p.pair.as_ref().map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
        let ls = p.levelset.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            opt_str(&p.degree),
            opt_str(&p.region),
            plo,
            phi,
            ls.map(|l| l.interval.lo.to_string()).unwrap_or_default(),
            ls.map(|l| l.interval.lo_closed.to_string()).unwrap_or_default(),
            ls.map(|l| l.interval.hi.to_string()).unwrap_or_default(),
            ls.map(|l| l.interval.hi_closed.to_string()).unwrap_or_default(),
            p.multiplicity,
            p.x.k,
            p.x.v,
            p.y.k,
            p.y.v
        );
    }
    s
}

pub fn barcode_csv(b: &BarcodeFile) -> String {
    let mut s = String::from("degree,lo,lo_closed,hi,hi_closed,multiplicity\n");
    for bar in &b.bars {
        let i = &bar.interval;
        let _ = writeln!(s, "{},{},{},{},{},{}", bar.degree, i.lo, i.lo_closed, i.hi, i.hi_closed, bar.multiplicity);
    }
    s
}

/// Result of one check suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub ok: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    pub suites: Vec<SuiteResult>,
}

fn suite(name: &str, r: Result<usize, Counterexample>) -> SuiteResult {
    match r {
        Ok(checked) => SuiteResult { name: name.into(), ok: true, checked, counterexample: None },
        Err(c) => SuiteResult { name: name.into(), ok: false, checked: 0, counterexample: Some(c) },
    }
}

/// Natural transformations out of blocks at every grid vertex must be `dim M(v)`-dimensional.
pub fn yoneda_check(m: &GridModule) -> Result<usize, Counterexample> {
    let g = &m.grid;
    let mut checked = 0;
    for s in 0..g.len() {
        if !g.is_vertex(s) {
            continue;
        }
        let d = m.nat_space_dim(g.point(s));
        checked += 1;
        if d != m.dims[s] {
            return Err(Counterexample {
                check: "yoneda".into(),
                at: vec![g.point(s).clone()],
                detail: format!("{d} natural transformations but dimension {}", m.dims[s]),
            });
        }
    }
    Ok(checked)
}

/// Runs the selected suites on a module.
pub fn run_checks(m: &GridModule, which: Suite) -> CheckReport {
    let mut suites = vec![];
    let want = |s: Suite| which == Suite::All || which == s;
    if want(Suite::Exactness) {
        suites.push(suite("exactness", m.cohomological_check().map(|s| s.squares + s.sequences)));
    }
    if want(Suite::Continuity) {
        suites.push(suite("continuity", m.seq_continuity_check()));
        suites.push(suite("diagram support", m.dgm_support_check().map(|_| m.grid.len())));
    }
    if want(Suite::Decomposition) {
        let r = match m.dgm() {
            Ok(d) => m.decomposition_check(&d),
            Err(e) => Err(Counterexample { check: "diagram".into(), at: vec![], detail: e.to_string() }),
        };
        suites.push(suite("decomposition", r));
    }
    if want(Suite::Yoneda) {
        suites.push(suite("yoneda", yoneda_check(m)));
    }
    CheckReport { ok: suites.iter().all(|s| s.ok), suites }
}

/// Loads a module from a complex file or a module dump.
pub fn load_module(text: &str, field: Option<u32>) -> Result<GridModule, CliError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    if v.get("samples").is_some() {
        let dump: ModuleDump = serde_json::from_value(v)?;
        return GridModule::from_dump(&dump).map_err(|e| CliError::Build(e.into()));
    }
    let file: ComplexFile = serde_json::from_value(v)?;
    let opts = options(file.field, field)?;
    let k = file.to_complex()?.with_function(0);
    Ok(evaluate(&k, 0, &opts)?.module)
}

/// Runs the interleaving check for the two functions of a complex file.
pub fn interleave_file(file: &ComplexFile, delta: &str, field: Option<u32>) -> Result<InterleaveReport, CliError> {
    if !file.has_second_function() {
        return Err(CliError::Input("interleaving needs value_g on every vertex".into()));
    }
    let opts = options(file.field, field)?;
    let k = file.to_complex()?;
    let delta = if delta == "auto" {
        sup_distance(&k, 0, 1)
    } else {
        parse_rational(delta).map_err(|e| CliError::Input(e.to_string()))?
    };
    Ok(interleaving_check(&k, 0, 1, &delta, &opts)?)
}

/// Instance generators.
pub mod gen {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::from_integer(x.into())).collect()
    }

    fn cone_facets() -> Vec<Vec<i64>> {
        vec![vec![1, 2, 5], vec![2, 3, 5], vec![3, 4, 5], vec![4, 1, 5]]
    }

    /// The cone over the 4-cycle `1-2-3-4` with apex 5, with `f(1) = f(3) = 0`,
    /// `f(2) = 1`, `f(4) = f(5) = 2`, and `g = g' + 1` for the flattened `g'`.
    pub fn hood() -> ComplexFile {
        let g: Vec<Q> = ints(&[1, 2, 1, 1, 3]);
        ComplexFile::from_values(&[1, 2, 3, 4, 5], &ints(&[0, 1, 0, 2, 2]), Some(&g), cone_facets())
    }

    /// The hood with `g'(1) = g'(3) = g'(4) = 0`.
    pub fn flattened_hood() -> ComplexFile {
        ComplexFile::from_values(&[1, 2, 3, 4, 5], &ints(&[0, 1, 0, 0, 2]), None, cone_facets())
    }

    /// The 4-cycle with heights `0, 1, 2, 1`.
    pub fn circle() -> ComplexFile {
        let edges = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]];
        ComplexFile::from_values(&[0, 1, 2, 3], &ints(&[0, 1, 2, 1]), None, edges)
    }

    /// The cone over the height-function 4-cycle, with the apex at height 3.
    pub fn cone() -> ComplexFile {
        ComplexFile::from_values(&[1, 2, 3, 4, 5], &ints(&[0, 1, 2, 1, 3]), None, cone_facets())
    }

    /// A random complex with at most 8 vertices, values in `{0, 1, 2, 3}`, dimension at
    /// most 2, and a second function within distance 1 of the first.
    pub fn random(seed: u64) -> ComplexFile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: i64 = rng.gen_range(2..=8);
        let mut facets: Vec<Vec<i64>> = vec![];
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if rng.gen_bool(0.12) {
                        facets.push(vec![a, b, c]);
                    }
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let covered = facets.iter().any(|f| f.contains(&a) && f.contains(&b));
                if !covered && rng.gen_bool(0.3) {
                    facets.push(vec![a, b]);
                }
            }
        }
        for v in 0..n {
            if !facets.iter().any(|f| f.contains(&v)) {
                facets.push(vec![v]);
            }
        }
        let f: Vec<Q> = (0..n).map(|_| Q::from_integer(rng.gen_range(0..4).into())).collect();
        let g: Vec<Q> = f
            .iter()
            .map(|x| x + Q::new(rng.gen_range(-2..=2i64).into(), 2.into()))
            .collect();
        let ids: Vec<i64> = (0..n).collect();
        ComplexFile::from_values(&ids, &f, Some(&g), facets)
    }

    pub fn preset(p: Preset, seed: u64) -> ComplexFile {
        match p {
            Preset::Hood => hood(),
            Preset::FlattenedHood => flattened_hood(),
            Preset::Circle => circle(),
            Preset::Cone => cone(),
            Preset::Random => random(seed),
        }
    }
}

fn region_color(r: Region) -> &'static str {
    match r {
        Region::Ord => "#4e79a7",
        Region::Rel => "#e15759",
        Region::Ext => "#59a14f",
    }
}

/// A strip point near the float coordinates `(x, y)`, for display purposes.
fn approx_point(x: f64, y: f64) -> StripPoint {
    let coord = |t: f64| {
        let k = (t / std::f64::consts::PI).round();
        let v = (t - k * std::f64::consts::PI).tan();
        let v = Q::from_float(v).unwrap_or_else(|| Q::from_integer(0.into()));
        Coord { k: k as i64, v: ExtRational::Fin(v) }
    };
    StripPoint::new(coord(x), coord(y))
}

/// SVG rendering of the strip in the arctan chart with region shading, the image of the
/// diagonal embedding, tile boundaries, and the diagram points.
pub fn plot_svg(d: &DiagramFile) -> String {
    use std::f64::consts::PI;
    let (x0, x1, y0, y1) = (-1.5 * PI, 3.5 * PI, -3.5 * PI, 1.5 * PI);
    let size = 600.0;
    let sx = |x: f64| (x - x0) / (x1 - x0) * size;
    let sy = |y: f64| size - (y - y0) / (y1 - y0) * size;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}">"#, size + 80.0, size + 80.0);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    // Region shading on a coarse raster of the strip interior.
    let cells = 80;
    let (dx, dy) = ((x1 - x0) / cells as f64, (y1 - y0) / cells as f64);
    let _ = writeln!(s, r#"<g class="regions" opacity="0.25">"#);
    for i in 0..cells {
        for j in 0..cells {
            let (cx, cy) = (x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy);
            if (cx + cy).abs() >= PI {
                continue;
            }
            let Ok(info) = classify_region(&approx_point(cx, cy)) else { continue };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                sx(cx - dx / 2.0),
                sy(cy + dy / 2.0),
                size / cells as f64,
                size / cells as f64,
                region_color(info.region)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    // Strip boundary lines x + y = -pi and x + y = pi.
    for c in [-PI, PI] {
        let _ = writeln!(
            s,
            r##"<line class="boundary" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#000000" stroke-width="1.5"/>"##,
            sx(x0),
            sy(c - x0),
            sx(x1),
            sy(c - x1)
        );
    }
    // Tile boundaries: the translates of the diagonal x - y = 2 pi m.
    for m in -1..=3 {
        let c = 2.0 * PI * m as f64;
        let (a, b) = ((c - PI) / 2.0, (c + PI) / 2.0);
        let _ = writeln!(
            s,
            r##"<line class="tile" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888" stroke-dasharray="4 3"/>"##,
            sx(a),
            sy(a - c),
            sx(b),
            sy(b - c)
        );
    }
    // The diagonal image of the real line.
    let h = PI / 2.0;
    let _ = writeln!(
        s,
        r##"<line class="embedding" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#f28e2b" stroke-width="2"/>"##,
        sx(-h),
        sy(-h),
        sx(h),
        sy(h)
    );
    for p in &d.points {
        let (x, y) = (p.x.to_f64(), p.y.to_f64());
        let color = p.region.map(region_color).unwrap_or("#000000");
        let _ = writeln!(
            s,
            r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="{}" fill="{color}" stroke="#000000"><title>({}, {}) x{}</title></circle>"##,
            sx(x),
            sy(y),
            3.0 + 1.5 * p.multiplicity as f64,
            p.x,
            p.y,
            p.multiplicity
        );
    }
    let _ = writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="14">"#);
    for (i, r) in [Region::Ord, Region::Rel, Region::Ext].into_iter().enumerate() {
        let x = 20.0 + 120.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="14" height="14" fill="{}"/>"#, size + 30.0, region_color(r));
        let _ = writeln!(s, r#"<text x="{}" y="{}">{r}</text>"#, x + 20.0, size + 42.0);
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

/// Runs a command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Dgm { input, output, format } => {
            let d = diagram_of(&load_complex(&input)?, output.field)?;
            let text = match format {
                Format::Json => to_json(&d),
                Format::Csv => diagram_csv(&d),
            };
            emit(&output.out, &text)?;
            Ok(0)
        }
        Command::Barcode { input, output, format } => {
            let d = diagram_of(&load_complex(&input)?, output.field)?;
            let diagram = Diagram { points: d.points };
            let b = BarcodeFile { field: d.field, bars: barcode_of(&diagram)? };
            let text = match format {
                Format::Json => to_json(&b),
                Format::Csv => barcode_csv(&b),
            };
            emit(&output.out, &text)?;
            Ok(0)
        }
        Command::Check { input, output, suite } => {
            let m = load_module(&read(&input)?, output.field)?;
            let report = run_checks(&m, suite);
            emit(&output.out, &to_json(&report))?;
            Ok(if report.ok { 0 } else { 1 })
        }
        Command::Interleave { input, output, delta } => {
            let report = interleave_file(&load_complex(&input)?, &delta, output.field)?;
            emit(&output.out, &to_json(&report))?;
            Ok(if report.ok { 0 } else { 1 })
        }
        Command::Plot { input, out } => {
            let d: DiagramFile = serde_json::from_str(&read(&input)?)?;
            emit(&out, &plot_svg(&d))?;
            Ok(0)
        }
        Command::Gen { preset, seed, values, out } => {
            let mut file = gen::preset(preset, seed);
            if let Some(vs) = values {
                let parsed: Vec<Q> = vs
                    .split(',')
                    .map(|t| parse_rational(t.trim()))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Input(e.to_string()))?;
                if parsed.len() != file.vertices.len() {
                    return Err(CliError::Input(format!(
                        "{} values for {} vertices",
                        parsed.len(),
                        file.vertices.len()
                    )));
                }
                for (v, x) in file.vertices.iter_mut().zip(parsed) {
                    v.value = ExactValue(x);
                }
            }
            emit(&out, &to_json(&file))?;
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        for f in [gen::hood(), gen::circle(), gen::random(7)] {
            let text = to_json(&f);
            let back: ComplexFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn floats_rejected() {
        let text = r#"{"vertices":[{"id":0,"value":0.5}],"simplices":[[0]]}"#;
        assert!(serde_json::from_str::<ComplexFile>(text).is_err());
        let text = r#"{"vertices":[{"id":0,"value":"1/2"},{"id":1,"value":3}],"simplices":[[0,1]]}"#;
        let f: ComplexFile = serde_json::from_str(text).unwrap();
        assert_eq!(f.field, 2);
        assert_eq!(f.vertices[1].value.0, Q::from_integer(3.into()));
    }

    #[test]
    fn diagram_round_trip_and_csv() {
        let d = diagram_of(&gen::hood(), None).unwrap();
        assert_eq!(d.points.len(), 2);
        let back: DiagramFile = serde_json::from_str(&to_json(&d)).unwrap();
        assert_eq!(back, d);
        let csv = diagram_csv(&d);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("degree,region,pair_lo"));
    }

    #[test]
    fn random_generation_is_deterministic() {
        assert_eq!(to_json(&gen::random(3)), to_json(&gen::random(3)));
    }

    #[test]
    fn plot_contains_points_and_legend() {
        let d = diagram_of(&gen::hood(), None).unwrap();
        let svg = plot_svg(&d);
        assert_eq!(svg.matches(r#"class="point""#).count(), 2);
        for label in ["Ord", "Rel", "Ext"] {
            assert!(svg.contains(&format!(">{label}</text>")));
        }
        let empty = plot_svg(&DiagramFile { field: 2, points: vec![] });
        assert_eq!(empty.matches(r#"class="point""#).count(), 0);
        assert!(empty.contains(r#"class="boundary""#));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
    }

    #[test]
    fn mutated_dump_fails_checks() {
        let d = diagram_of(&gen::hood(), None).unwrap();
        assert_eq!(d.points.len(), 2);
        let k = gen::hood().to_complex().unwrap().with_function(0);
        let m = evaluate(&k, 0, &BuildOptions::default()).unwrap().module;
        assert!(run_checks(&m, Suite::All).ok);
        let mut dump = m.to_dump();
        let e = dump.left.iter_mut().find(|e| e.matrix.iter().flatten().any(|&x| x != 0)).unwrap();
        for row in e.matrix.iter_mut() {
            for x in row.iter_mut() {
                *x = 0;
            }
        }
        let text = serde_json::to_string(&dump).unwrap();
        let bad = load_module(&text, None).unwrap();
        let report = run_checks(&bad, Suite::All);
        assert!(!report.ok);
        let failed = report.suites.iter().find(|s| !s.ok).unwrap();
        assert!(!failed.counterexample.as_ref().unwrap().at.is_empty());
    }
}
