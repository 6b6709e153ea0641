//! Landmark sequences, facial-region connectivity and feature subsets.
//!
//! Sequence JSON:
//!
//! ```json
//! {"subject": "F001", "emotion": "happiness", "frames": [{"i": 0, "p": [[x, y, z], ...]}]}
//! ```
//!
//! Sequence CSV has one row per frame, `frame, x0, y0, z0, x1, y1, z1, ...`.
//! An optional `frame,x0,...` header row is skipped, and an optional leading
//! `# subject=<id> emotion=<label>` comment carries the sequence metadata.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A 3D coordinate in millimeters.
pub type Point3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Region {
    Jawline,
    Mouth,
    Nose,
    LeftEye,
    RightEye,
    LeftEyebrow,
    RightEyebrow,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::Jawline,
        Region::Mouth,
        Region::Nose,
        Region::LeftEye,
        Region::RightEye,
        Region::LeftEyebrow,
        Region::RightEyebrow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Jawline => "jawline",
            Region::Mouth => "mouth",
            Region::Nose => "nose",
            Region::LeftEye => "leftEye",
            Region::RightEye => "rightEye",
            Region::LeftEyebrow => "leftEyebrow",
            Region::RightEyebrow => "rightEyebrow",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown region '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Happiness,
    Sadness,
    Surprise,
    Other,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happiness,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happiness => "happiness",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Other => "other",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown emotion '{s}'")))
    }
}

/// One frame of 3D landmarks.
#[derive(Clone, Debug, PartialEq)]
pub struct FacialPose {
    frame_index: u32,
    points: Vec<Point3>,
}

impl FacialPose {
    pub fn new(frame_index: u32, points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation(format!(
                "frame {frame_index}: landmark_count must be positive"
            )));
        }
        if let Some(k) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Validation(format!(
                "frame {frame_index}: non-finite coordinate at landmark {k}"
            )));
        }
        Ok(Self {
            frame_index,
            points,
        })
    }

    pub fn frame_index(&self) -> u32 {
        self.frame_index
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn landmark_count(&self) -> usize {
        self.points.len()
    }
}

/// An ordered, labeled sequence of poses with a constant landmark count.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSequence {
    subject_id: String,
    emotion: Emotion,
    frames: Vec<FacialPose>,
}

impl LandmarkSequence {
    pub fn new(subject_id: impl Into<String>, emotion: Emotion, frames: Vec<FacialPose>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::Validation("sequence has no frames".into()));
        };
        let count = first.landmark_count();
        for pair in frames.windows(2) {
            if pair[1].frame_index <= pair[0].frame_index {
                return Err(Error::Validation(format!(
                    "frame_index not increasing: {} follows {}",
                    pair[1].frame_index, pair[0].frame_index
                )));
            }
        }
        if let Some(bad) = frames.iter().find(|f| f.landmark_count() != count) {
            return Err(Error::Validation(format!(
                "landmark_count not constant: frame {} has {} landmarks, expected {count}",
                bad.frame_index,
                bad.landmark_count()
            )));
        }
        Ok(Self {
            subject_id: subject_id.into(),
            emotion,
            frames,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn emotion(&self) -> Emotion {
        self.emotion
    }

    pub fn frames(&self) -> &[FacialPose] {
        &self.frames
    }

    pub fn landmark_count(&self) -> usize {
        self.frames[0].landmark_count()
    }

    pub fn frame_ids(&self) -> Vec<u32> {
        self.frames.iter().map(|f| f.frame_index).collect()
    }

    pub fn to_json_string(&self) -> String {
        let file = SequenceFile {
            subject: self.subject_id.clone(),
            emotion: self.emotion.as_str().to_string(),
            frames: self
                .frames
                .iter()
                .map(|f| FrameRecord {
                    i: f.frame_index as i64,
                    p: f.points.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("sequence serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SequenceFile = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        let emotion = file.emotion.parse()?;
        let mut frames = Vec::with_capacity(file.frames.len());
        for (k, record) in file.frames.into_iter().enumerate() {
            let index = u32::try_from(record.i)
                .map_err(|_| Error::format(format!("frame {k}"), format!("invalid frame index {}", record.i)))?;
            frames.push(FacialPose::new(index, record.p)?);
        }
        Self::new(file.subject, emotion, frames)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# subject={} emotion={}\nframe", self.subject_id, self.emotion);
        for k in 0..self.landmark_count() {
            out.push_str(&format!(",x{k},y{k},z{k}"));
        }
        out.push('\n');
        for frame in &self.frames {
            out.push_str(&frame.frame_index.to_string());
            for p in &frame.points {
                for c in p {
                    out.push(',');
                    out.push_str(&c.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV layout. `default_subject` is used when the metadata
    /// comment is absent.
    pub fn from_csv_str(text: &str, default_subject: &str) -> Result<Self> {
        let mut subject = default_subject.to_string();
        let mut emotion = Emotion::Other;
        for line in text.lines().take_while(|l| l.trim_start().starts_with('#')) {
            for token in line.trim_start_matches(|c: char| c == '#' || c.is_whitespace()).split_whitespace() {
                match token.split_once('=') {
                    Some(("subject", v)) => subject = v.to_string(),
                    Some(("emotion", v)) => emotion = v.parse()?,
                    _ => {}
                }
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut frames = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::format(format!("line {line}"), e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("frame")) {
                continue;
            }
            if record.is_empty() || (record.len() - 1) % 3 != 0 {
                return Err(Error::format(
                    format!("line {line}"),
                    format!("expected frame followed by x,y,z triples, got {} fields", record.len()),
                ));
            }
            let index: u32 = record[0]
                .parse()
                .map_err(|_| Error::format(format!("line {line}"), format!("invalid frame index '{}'", &record[0])))?;
            let mut coords = Vec::with_capacity(record.len() - 1);
            for field in record.iter().skip(1) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::format(format!("line {line}, frame {index}"), format!("invalid coordinate '{field}'"))
                })?;
                coords.push(v);
            }
            let points = coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            frames.push(FacialPose::new(index, points)?);
        }
        Self::new(subject, emotion, frames)
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    subject: String,
    emotion: String,
    frames: Vec<FrameRecord>,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    i: i64,
    p: Vec<Point3>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceFormat {
    Json,
    Csv,
}

impl SequenceFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(SequenceFormat::Json),
            "csv" => Some(SequenceFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for SequenceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(SequenceFormat::Json),
            "csv" => Ok(SequenceFormat::Csv),
            other => Err(Error::Parameter(format!("unknown sequence format '{other}'"))),
        }
    }
}

pub fn load_sequence(path: &Path, format: SequenceFormat) -> Result<LandmarkSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        SequenceFormat::Json => LandmarkSequence::from_json_str(&text),
        SequenceFormat::Csv => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("unknown");
            LandmarkSequence::from_csv_str(&text, stem)
        }
    }
}

pub fn save_sequence(seq: &LandmarkSequence, path: &Path, format: SequenceFormat) -> Result<()> {
    let text = match format {
        SequenceFormat::Json => seq.to_json_string(),
        SequenceFormat::Csv => seq.to_csv_string(),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Known edge graph over landmarks, partitioned into facial regions.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkConnectivity {
    edges: Vec<(usize, usize)>,
    region_of: Vec<Region>,
}

const DEFAULT_CONNECTIVITY: &str = include_str!("../data/connectivity_default.json");

#[derive(Serialize, Deserialize)]
struct ConnectivityFile {
    regions: BTreeMap<String, Vec<usize>>,
    edges: Vec<[usize; 2]>,
}

impl LandmarkConnectivity {
    pub fn new(region_of: Vec<Region>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = region_of.len();
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop edge at landmark {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) endpoint out of range for {n} landmarks"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Validation(format!("duplicate edge ({a}, {b})")));
            }
            if region_of[a] != region_of[b] {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) crosses regions {} and {}",
                    region_of[a], region_of[b]
                )));
            }
        }
        Ok(Self { edges, region_of })
    }

    /// The bundled 83-landmark, 81-edge face layout: eye, eyebrow and mouth
    /// rings plus open nose and jawline polylines.
    pub fn default_face() -> Self {
        Self::from_json_str(DEFAULT_CONNECTIVITY).expect("bundled connectivity is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ConnectivityFile = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        let n: usize = file.regions.values().map(Vec::len).sum();
        let mut region_of: Vec<Option<Region>> = vec![None; n];
        for (name, indices) in &file.regions {
            let region: Region = name.parse()?;
            for &i in indices {
                let slot = region_of.get_mut(i).ok_or_else(|| {
                    Error::Validation(format!("region {name}: index {i} out of range for {n} landmarks"))
                })?;
                if slot.replace(region).is_some() {
                    return Err(Error::Validation(format!("landmark {i} assigned to more than one region")));
                }
            }
        }
        let region_of = region_of
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::Validation(format!("landmark {i} has no region"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(region_of, file.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let mut regions: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.region_of.iter().enumerate() {
            regions.entry(r.as_str().to_string()).or_default().push(i);
        }
        let file = ConnectivityFile {
            regions,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&file).expect("connectivity serializes")
    }

    pub fn landmark_count(&self) -> usize {
        self.region_of.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn region_of(&self, landmark: usize) -> Region {
        self.region_of[landmark]
    }

    pub fn indices_in(&self, region: Region) -> Vec<usize> {
        (0..self.region_of.len()).filter(|&i| self.region_of[i] == region).collect()
    }
}

/// A non-empty set of facial regions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureSubset(BTreeSet<Region>);

impl FeatureSubset {
    /// Named presets used for the conditional small-multiples comparison.
    pub const PRESETS: [&'static str; 4] = ["full", "eyes+nose", "mouth+nose", "eyebrows+nose"];

    pub fn new(regions: impl IntoIterator<Item = Region>) -> Result<Self> {
        let set: BTreeSet<Region> = regions.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Parameter("feature subset must not be empty".into()));
        }
        Ok(Self(set))
    }

    pub fn full() -> Self {
        Self(Region::ALL.into_iter().collect())
    }

    pub fn preset(name: &str) -> Option<Self> {
        use Region::*;
        let regions: &[Region] = match name {
            "full" => &Region::ALL,
            "eyes+nose" => &[LeftEye, RightEye, Nose],
            "mouth+nose" => &[Mouth, Nose],
            "eyebrows+nose" => &[LeftEyebrow, RightEyebrow, Nose],
            _ => return None,
        };
        Some(Self(regions.iter().copied().collect()))
    }

    pub fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, region: Region) -> bool {
        self.0.contains(&region)
    }

    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|r| r.as_str().to_string()).collect()
    }

    /// Canonical name: the preset name when one matches, else the region
    /// labels joined with `+`.
    pub fn name(&self) -> String {
        Self::PRESETS
            .iter()
            .find(|p| Self::preset(p).as_ref() == Some(self))
            .map(|p| p.to_string())
            .unwrap_or_else(|| self.labels().join("+"))
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FeatureSubset {
    type Err = Error;

    /// Accepts a preset name or region labels separated by `+` or `,`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = Self::preset(s.trim()) {
            return Ok(p);
        }
        let regions = s
            .split(['+', ','])
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Region>>>()?;
        Self::new(regions)
    }
}

/// Result of restricting a pose to a feature subset.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub points: Vec<Point3>,
    /// Edges re-indexed against `points`.
    pub edges: Vec<(usize, usize)>,
    /// Original landmark index of each selected point.
    pub landmark_indices: Vec<usize>,
    /// Original connectivity index of each selected edge.
    pub edge_indices: Vec<usize>,
}

pub fn select_subset(
    pose: &FacialPose,
    conn: &LandmarkConnectivity,
    subset: &FeatureSubset,
) -> Result<Selection> {
    if conn.landmark_count() != pose.landmark_count() {
        return Err(Error::Validation(format!(
            "connectivity covers {} landmarks but the pose has {}",
            conn.landmark_count(),
            pose.landmark_count()
        )));
    }
    let mut local = vec![usize::MAX; pose.landmark_count()];
    let mut landmark_indices = Vec::new();
    for (i, slot) in local.iter_mut().enumerate() {
        if subset.contains(conn.region_of(i)) {
            *slot = landmark_indices.len();
            landmark_indices.push(i);
        }
    }
    if landmark_indices.is_empty() {
        return Err(Error::EmptySelection(subset.name()));
    }
    let mut edges = Vec::new();
    let mut edge_indices = Vec::new();
    for (k, &(a, b)) in conn.edges().iter().enumerate() {
        // Edges never cross regions, so checking one endpoint is enough.
        if local[a] != usize::MAX {
            edges.push((local[a], local[b]));
            edge_indices.push(k);
        }
    }
    Ok(Selection {
        points: landmark_indices.iter().map(|&i| pose.points()[i]).collect(),
        edges,
        landmark_indices,
        edge_indices,
    })
}

/// Intensity time series of one action unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuSeries {
    pub au_id: u32,
    pub intensities: Vec<f64>,
}

/// Parsed action-unit table, aligned by the frame column.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuTable {
    pub frames: Vec<i64>,
    pub series: Vec<AuSeries>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

pub const AU_INTENSITY_MAX: f64 = 5.0;

pub fn load_au_csv(path: &Path) -> Result<AuTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_au_csv(&text)
}

/// Parses an upstream AU table: a `frame` column plus `AU<NN>_r` intensity
/// columns. Other columns are ignored; out-of-range intensities are clamped
/// to `[0, 5]` with a warning.
pub fn parse_au_csv(text: &str) -> Result<AuTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::format("line 1", e.to_string()))?
        .clone();
    let frame_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("frame"))
        .ok_or_else(|| Error::format("line 1", "missing frame column"))?;
    let au_cols: Vec<(usize, u32)> = headers
        .iter()
        .enumerate()
        .filter_map(|(c, h)| {
            let digits = h.strip_prefix("AU")?.strip_suffix("_r")?;
            Some((c, digits.parse().ok()?))
        })
        .collect();

    let mut table = AuTable::default();
    if au_cols.is_empty() {
        let msg = "AU table has no AU<NN>_r columns".to_string();
        log::warn!("{msg}");
        table.warnings.push(msg);
    }
    let mut series: Vec<AuSeries> = au_cols
        .iter()
        .map(|&(_, au_id)| AuSeries {
            au_id,
            intensities: Vec::new(),
        })
        .collect();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let frame_field = record.get(frame_col).unwrap_or("");
        let frame: i64 = frame_field
            .parse()
            .or_else(|_| frame_field.parse::<f64>().map(|f| f as i64))
            .map_err(|_| Error::format(format!("line {line}"), format!("invalid frame '{frame_field}'")))?;
        table.frames.push(frame);
        for (s, &(col, au_id)) in series.iter_mut().zip(&au_cols) {
            let field = record.get(col).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                Error::format(format!("line {line}"), format!("invalid AU{au_id:02} intensity '{field}'"))
            })?;
            if !v.is_finite() {
                return Err(Error::format(format!("line {line}"), format!("non-finite AU{au_id:02} intensity")));
            }
            let clamped = v.clamp(0.0, AU_INTENSITY_MAX);
            if clamped != v {
                let msg = format!("line {line}: AU{au_id:02} intensity {v} clamped to {clamped}");
                log::warn!("{msg}");
                table.warnings.push(msg);
            }
            s.intensities.push(clamped);
        }
    }
    table.series = series;
    Ok(table)
}
