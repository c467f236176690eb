//! Scene manifests: one JSON file per sequence, paths relative to it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eval::DEFAULT_FRAME_RATE;
use crate::geometry::io::{load_boxes, load_cloud};
use crate::geometry::{OrientedBox, PointCloud, Pose};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame_index: u32,
    pub cloud: PathBuf,
    pub pose: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<PathBuf>,
    /// Planted labels of synthetic scenes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub sequence_id: String,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    pub frames: Vec<FrameEntry>,
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

/// A manifest together with the directory its paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: SceneManifest,
    pub base: PathBuf,
}

impl SceneManifest {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::invalid(format!("manifest {} lists no frames", self.sequence_id)));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(Error::invalid("frame rate must be positive"));
        }
        if self.frames.windows(2).any(|w| w[1].frame_index <= w[0].frame_index) {
            return Err(Error::invalid("frames must be ordered by strictly increasing frame_index"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<LoadedManifest> {
        let manifest: SceneManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        manifest.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedManifest { manifest, base })
    }
}

impl LoadedManifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn len(&self) -> usize {
        self.manifest.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.frames.is_empty()
    }

    /// Cloud of frame `t` carrying the manifest pose and index.
    pub fn cloud(&self, t: usize) -> Result<PointCloud> {
        let f = &self.manifest.frames[t];
        Ok(load_cloud(&self.resolve(&f.cloud))?.with_frame(f.frame_index, f.pose.clone()))
    }

    pub fn clouds(&self) -> Result<Vec<PointCloud>> {
        (0..self.len()).map(|t| self.cloud(t)).collect()
    }

    pub fn boxes(&self, t: usize) -> Result<Vec<OrientedBox>> {
        let f = &self.manifest.frames[t];
        let path = f.boxes.as_ref().ok_or_else(|| {
            Error::invalid(format!("frame {} of {} has no boxes file", f.frame_index, self.manifest.sequence_id))
        })?;
        load_boxes(&self.resolve(path))
    }

    pub fn labels(&self, t: usize) -> Result<Option<Vec<u32>>> {
        match &self.manifest.frames[t].labels {
            Some(p) => Ok(Some(serde_json::from_str(&std::fs::read_to_string(self.resolve(p))?)?)),
            None => Ok(None),
        }
    }
}
