use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_openlabel_with, FrameAnnotation, OpenLabelError, ParseOptions};
use crate::class::{ClassId, LabelClass};
use crate::io::{read_bytes, FormatError};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// Frame ids per split, as stored in `splits.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    #[serde(default)]
    pub train: Vec<String>,
    #[serde(default)]
    pub val: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
}

impl SplitSpec {
    pub fn ids(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn read(path: &Path) -> Result<Self, OpenLabelError> {
        let bytes = read_bytes(path)?;
        serde_json::from_slice(&bytes).map_err(|e| OpenLabelError::Json {
            line: e.line(),
            column: e.column(),
            message: format!("{}: {e}", path.display()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub manifest_version: u32,
    pub split: Split,
    pub frames: Vec<FrameAnnotation>,
    /// Label counts keyed by class name; unmapped dataset classes count under `other`.
    pub class_histogram: BTreeMap<String, usize>,
}

impl DatasetManifest {
    pub fn new(split: Split, mut frames: Vec<FrameAnnotation>) -> Self {
        frames.sort_by(|a, b| a.frame_id.cmp(&b.frame_id));
        let mut class_histogram: BTreeMap<String, usize> =
            ClassId::ALL.iter().map(|c| (c.name().to_string(), 0)).collect();
        for label in frames.iter().flat_map(|f| &f.labels) {
            let key = match &label.class {
                LabelClass::Known(c) => c.name(),
                LabelClass::Other(_) => "other",
            };
            *class_histogram.entry(key.to_string()).or_default() += 1;
        }
        DatasetManifest { manifest_version: MANIFEST_VERSION, split, frames, class_histogram }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, OpenLabelError> {
        let m: DatasetManifest = serde_json::from_str(text).map_err(|e| OpenLabelError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(OpenLabelError::Manifest(format!(
                "unsupported manifest_version {} (expected {MANIFEST_VERSION})",
                m.manifest_version
            )));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self, OpenLabelError> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes)
            .map_err(|_| FormatError::Invalid(format!("{} is not UTF-8", path.display())))?;
        Self::from_json(&text)
    }

    pub fn frame(&self, frame_id: &str) -> Option<&FrameAnnotation> {
        self.frames
            .binary_search_by(|f| f.frame_id.as_str().cmp(frame_id))
            .ok()
            .map(|i| &self.frames[i])
    }
}

/// Train, val and test manifests of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitManifests {
    pub train: DatasetManifest,
    pub val: DatasetManifest,
    pub test: DatasetManifest,
}

impl SplitManifests {
    pub fn get(&self, split: Split) -> &DatasetManifest {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

/// Parse every `annotations/*.json` under `root` and partition the frames by
/// `splits`.
///
/// Frame ids are `<document stem>-<frame key>`. Cloud and image URIs are
/// resolved against `root` and must exist. Frames not listed in any split
/// are left out.
pub fn build_manifests(
    root: &Path,
    splits: &SplitSpec,
    opts: &ParseOptions,
) -> Result<SplitManifests, OpenLabelError> {
    let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
    let mut overlaps = BTreeSet::new();
    for split in Split::ALL {
        for id in splits.ids(split) {
            if let Some(prev) = seen.insert(id, split) {
                if prev != split {
                    overlaps.insert(format!("{id} ({} and {})", prev.name(), split.name()));
                } else {
                    overlaps.insert(format!("{id} (twice in {})", split.name()));
                }
            }
        }
    }
    if !overlaps.is_empty() {
        return Err(OpenLabelError::Manifest(format!(
            "frames assigned to more than one split: {}",
            overlaps.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    let ann_dir = root.join("annotations");
    let entries = fs::read_dir(&ann_dir)
        .map_err(|source| FormatError::Io { path: ann_dir.clone(), source })?;
    let mut docs: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| FormatError::Io { path: ann_dir.clone(), source })?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "json") {
            docs.push(path);
        }
    }
    docs.sort();

    let mut frames: BTreeMap<String, FrameAnnotation> = BTreeMap::new();
    for doc in &docs {
        let text = String::from_utf8(read_bytes(doc)?)
            .map_err(|_| FormatError::Invalid(format!("{} is not UTF-8", doc.display())))?;
        let stem = doc.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let parsed = parse_openlabel_with(&text, opts).map_err(|e| match e {
            OpenLabelError::Json { line, column, message } => OpenLabelError::Json {
                line,
                column,
                message: format!("{}: {message}", doc.display()),
            },
            other => other,
        })?;
        for mut frame in parsed {
            frame.frame_id = format!("{stem}-{}", frame.frame_id);
            let resolve = |p: &Option<String>| p.as_ref().map(|p| root.join(p).to_string_lossy().into_owned());
            frame.cloud_path = resolve(&frame.cloud_path);
            frame.image_path = resolve(&frame.image_path);
            if frames.contains_key(&frame.frame_id) {
                return Err(OpenLabelError::Manifest(format!("duplicate frame id {}", frame.frame_id)));
            }
            frames.insert(frame.frame_id.clone(), frame);
        }
    }

    let unknown: Vec<&str> = seen.keys().copied().filter(|id| !frames.contains_key(*id)).collect();
    if !unknown.is_empty() {
        return Err(OpenLabelError::Manifest(format!(
            "split file lists frames with no annotation: {}",
            unknown.join(", ")
        )));
    }
    let mut missing = Vec::new();
    for id in seen.keys() {
        let f = &frames[*id];
        for p in [&f.cloud_path, &f.image_path].into_iter().flatten() {
            if !Path::new(p).exists() {
                missing.push(format!("{id}: {p}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(OpenLabelError::Manifest(format!("referenced files not found: {}", missing.join(", "))));
    }

    let take = |split: Split| {
        let chosen = splits.ids(split).iter().map(|id| frames[id].clone()).collect();
        DatasetManifest::new(split, chosen)
    };
    Ok(SplitManifests { train: take(Split::Train), val: take(Split::Val), test: take(Split::Test) })
}
