//! Macroblock RoI indicators and quantization-parameter maps.

use super::projection::{PlaneConfig, ProjectionMaps};
use super::transform::check_qp;
use crate::roi::RoiMask;
use crate::{Error, Result};

/// Per-macroblock QP for one frame, raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QpMap {
    pub mb_cols: usize,
    pub mb_rows: usize,
    qps: Vec<u8>,
}

impl QpMap {
    pub fn uniform(plane: &PlaneConfig, qp: i32) -> Result<Self> {
        let qp = check_qp(qp)?;
        Ok(Self {
            mb_cols: plane.mb_cols(),
            mb_rows: plane.mb_rows(),
            qps: vec![qp; plane.macroblocks()],
        })
    }

    pub fn from_values(mb_cols: usize, mb_rows: usize, qps: Vec<u8>) -> Result<Self> {
        if qps.len() != mb_cols * mb_rows {
            return Err(Error::LengthMismatch {
                expected: mb_cols * mb_rows,
                actual: qps.len(),
            });
        }
        if let Some(&bad) = qps.iter().find(|&&q| q > super::transform::MAX_QP) {
            return Err(Error::QpOutOfRange(i32::from(bad)));
        }
        Ok(Self { mb_cols, mb_rows, qps })
    }

    pub fn values(&self) -> &[u8] {
        &self.qps
    }

    pub fn get(&self, mb: usize) -> u8 {
        self.qps[mb]
    }

    pub fn len(&self) -> usize {
        self.qps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qps.is_empty()
    }

    pub fn uniform_value(&self) -> Option<u8> {
        let first = *self.qps.first()?;
        self.qps.iter().all(|&q| q == first).then_some(first)
    }

    pub(crate) fn check_against(&self, plane: &PlaneConfig) -> Result<()> {
        if self.mb_cols != plane.mb_cols() || self.mb_rows != plane.mb_rows() {
            return Err(Error::invalid(format!(
                "QP map is {}x{} macroblocks, image needs {}x{}",
                self.mb_cols,
                self.mb_rows,
                plane.mb_cols(),
                plane.mb_rows()
            )));
        }
        Ok(())
    }
}

/// Binary macroblock-by-frame RoI indicator; `columns[t][b]` is macroblock
/// `b` of frame `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoiMacroblockIndicator {
    pub macroblocks: usize,
    pub columns: Vec<Vec<bool>>,
}

impl RoiMacroblockIndicator {
    pub fn new(macroblocks: usize) -> Self {
        Self {
            macroblocks,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, column: Vec<bool>) -> Result<()> {
        if column.len() != self.macroblocks {
            return Err(Error::LengthMismatch {
                expected: self.macroblocks,
                actual: column.len(),
            });
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.columns.len()
    }
}

/// Smallest macroblock set covering every RoI point: a macroblock is marked
/// when some RoI point targets one of its pixels. Points that lost their
/// pixel to a nearer point still mark the macroblock they targeted.
pub fn solve_indicator(mask: &RoiMask, maps: &ProjectionMaps, plane: &PlaneConfig) -> Result<Vec<bool>> {
    if mask.len() != maps.slots.len() {
        return Err(Error::LengthMismatch {
            expected: maps.slots.len(),
            actual: mask.len(),
        });
    }
    let mut column = vec![false; plane.macroblocks()];
    for i in mask.indices() {
        if let Some(px) = maps.slots[i].pixel() {
            column[plane.macroblock_of(px)] = true;
        }
    }
    Ok(column)
}

/// `q_r` on marked macroblocks, `q_b` elsewhere.
pub fn build_qp_map(column: &[bool], plane: &PlaneConfig, q_r: i32, q_b: i32) -> Result<QpMap> {
    let (q_r, q_b) = (check_qp(q_r)?, check_qp(q_b)?);
    if column.len() != plane.macroblocks() {
        return Err(Error::LengthMismatch {
            expected: plane.macroblocks(),
            actual: column.len(),
        });
    }
    Ok(QpMap {
        mb_cols: plane.mb_cols(),
        mb_rows: plane.mb_rows(),
        qps: column.iter().map(|&r| if r { q_r } else { q_b }).collect(),
    })
}
