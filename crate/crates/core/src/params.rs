//! The preprocessing parameter vector and discrete search spaces over it.
//!
//! A parameter point has six knobs, in fixed axis order: segmentation
//! threshold, median blur window, closing element, minimum tissue area,
//! minimum hole area, and maximum holes kept per tissue component. A search
//! space is an ordered value grid per axis; moves step along one axis at a
//! time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Number of tunable axes.
pub const AXES: usize = 6;

/// Axis names in canonical order, used in keys, configs, and error messages.
pub const AXIS_NAMES: [&str; AXES] = [
    "seg_thresh",
    "blur_k",
    "close_k",
    "area_tissue_min",
    "area_hole_min",
    "max_holes",
];

/// One preprocessing configuration for the segmentation pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreprocParams {
    /// Strict threshold on the blurred saturation channel.
    pub seg_thresh: u32,
    /// Median blur window (odd).
    pub blur_k: u32,
    /// Morphological closing element.
    pub close_k: u32,
    /// Tissue components smaller than this (in downsampled px^2) are dropped.
    pub area_tissue_min: u32,
    /// Holes smaller than this (in downsampled px^2) are filled back in.
    pub area_hole_min: u32,
    /// At most this many holes are kept per tissue component.
    pub max_holes: u32,
}

impl PreprocParams {
    pub fn new(values: [u32; AXES]) -> Self {
        Self {
            seg_thresh: values[0],
            blur_k: values[1],
            close_k: values[2],
            area_tissue_min: values[3],
            area_hole_min: values[4],
            max_holes: values[5],
        }
    }

    /// Values in canonical axis order.
    pub fn values(&self) -> [u32; AXES] {
        [
            self.seg_thresh,
            self.blur_k,
            self.close_k,
            self.area_tissue_min,
            self.area_hole_min,
            self.max_holes,
        ]
    }

    /// Canonical string key: the six values joined by `:` in axis order.
    /// Distinct parameter points always produce distinct keys.
    pub fn canonical_key(&self) -> String {
        self.values().map(|v| v.to_string()).join(":")
    }

    /// Parses a canonical `a:b:c:d:e:f` key.
    pub fn from_key(key: &str) -> Result<Self> {
        let parts: Vec<&str> = key.split(':').collect();
        if parts.len() != AXES {
            return Err(Error::Malformed(format!(
                "parameter key {key:?} must have {AXES} fields"
            )));
        }
        let mut values = [0u32; AXES];
        for (i, part) in parts.iter().enumerate() {
            values[i] = part.parse().map_err(|_| {
                Error::Malformed(format!("parameter key {key:?}: bad value {part:?}"))
            })?;
        }
        Ok(Self::new(values))
    }
}

/// Default starting configuration: the values a hand-tuned pipeline ships
/// with. Not necessarily on any search grid; see [`ParamSpace::snap`].
pub fn default_start() -> PreprocParams {
    PreprocParams::new([8, 7, 4, 100, 16, 8])
}

/// Discrete, ordered search space: one strictly increasing value grid per
/// axis. Total size always exceeds one point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpace {
    axes: [Vec<u32>; AXES],
}

impl ParamSpace {
    /// Builds a space from per-axis grids, validating grid shape and value
    /// ranges.
    pub fn new(axes: [Vec<u32>; AXES]) -> Result<Self> {
        for (i, grid) in axes.iter().enumerate() {
            let name = AXIS_NAMES[i];
            if grid.is_empty() {
                return Err(Error::InvalidParameter(format!("axis {name}: empty grid")));
            }
            if !grid.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "axis {name}: grid must be strictly increasing"
                )));
            }
        }
        if axes[0].iter().any(|&v| v > 255) {
            return Err(Error::InvalidParameter(
                "axis seg_thresh: values must fit in 0..=255".into(),
            ));
        }
        if axes[1].iter().any(|&v| v % 2 == 0 || v == 0) {
            return Err(Error::InvalidParameter(
                "axis blur_k: window sizes must be odd and nonzero".into(),
            ));
        }
        if axes[2].iter().any(|&v| v == 0) {
            return Err(Error::InvalidParameter(
                "axis close_k: element sizes must be at least 1".into(),
            ));
        }
        let space = Self { axes };
        if space.len() < 2 {
            return Err(Error::InvalidParameter(
                "search space must contain more than one configuration".into(),
            ));
        }
        Ok(space)
    }

    /// The full production search space (15,360 configurations).
    pub fn default_space() -> Self {
        Self::new([
            (4..=13).collect(),
            vec![3, 5, 7, 9],
            (1..=6).collect(),
            vec![40, 80, 120, 160],
            vec![4, 8, 16, 32],
            vec![0, 2, 4, 8],
        ])
        .expect("built-in space is valid")
    }

    /// A reduced space for exhaustive sweeps (1,296 configurations).
    pub fn small_space() -> Self {
        Self::new([
            (8..=13).collect(),
            vec![3, 5, 7],
            vec![2, 3, 4],
            vec![40, 80, 120, 160],
            vec![4, 8, 16],
            vec![0, 8],
        ])
        .expect("built-in space is valid")
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_space()),
            "small" => Ok(Self::small_space()),
            other => Err(Error::Config(format!(
                "space.preset: unknown preset {other:?} (expected \"default\" or \"small\")"
            ))),
        }
    }

    /// Value grid of one axis.
    pub fn axis(&self, i: usize) -> &[u32] {
        &self.axes[i]
    }

    /// Total number of configurations (product of grid lengths).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|g| g.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        false // validated to hold at least two configurations
    }

    /// Grid index per axis if the point lies on every grid.
    pub fn indices_of(&self, p: &PreprocParams) -> Option<[usize; AXES]> {
        let values = p.values();
        let mut idx = [0usize; AXES];
        for i in 0..AXES {
            idx[i] = self.axes[i].binary_search(&values[i]).ok()?;
        }
        Some(idx)
    }

    pub fn contains(&self, p: &PreprocParams) -> bool {
        self.indices_of(p).is_some()
    }

    /// All configurations in lexicographic order: the first axis varies
    /// slowest, the last fastest. The first element is the all-minimum
    /// corner, the last the all-maximum corner.
    pub fn enumerate(&self) -> impl Iterator<Item = PreprocParams> + '_ {
        let total = self.len();
        (0..total).map(move |mut rank| {
            let mut values = [0u32; AXES];
            for i in (0..AXES).rev() {
                let grid = &self.axes[i];
                values[i] = grid[rank % grid.len()];
                rank /= grid.len();
            }
            PreprocParams::new(values)
        })
    }

    /// One uniform random move: pick an axis (uniformly over axes with at
    /// least two values), step one grid position up or down with equal
    /// probability, taking the only legal direction at a grid edge. The
    /// result differs from `p` in exactly one axis by one grid step.
    pub fn perturb<R: Rng>(&self, p: &PreprocParams, rng: &mut R) -> Result<PreprocParams> {
        let idx = self.indices_of(p).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "perturb start {} is not on the search grid",
                p.canonical_key()
            ))
        })?;
        let movable: Vec<usize> = (0..AXES).filter(|&i| self.axes[i].len() >= 2).collect();
        debug_assert!(!movable.is_empty(), "space size > 1 implies a movable axis");
        let axis = movable[rng.gen_range(0..movable.len())];
        let grid = &self.axes[axis];
        let at = idx[axis];
        let up = if at == 0 {
            true
        } else if at == grid.len() - 1 {
            false
        } else {
            rng.gen_range(0..2u32) == 1
        };
        let mut values = p.values();
        values[axis] = if up { grid[at + 1] } else { grid[at - 1] };
        Ok(PreprocParams::new(values))
    }

    /// All one-step neighbors of a point (used for landscape analysis).
    pub fn neighbors(&self, p: &PreprocParams) -> Result<Vec<PreprocParams>> {
        let idx = self.indices_of(p).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "neighborhood center {} is not on the search grid",
                p.canonical_key()
            ))
        })?;
        let mut out = Vec::new();
        for axis in 0..AXES {
            let grid = &self.axes[axis];
            let at = idx[axis];
            if at > 0 {
                let mut values = p.values();
                values[axis] = grid[at - 1];
                out.push(PreprocParams::new(values));
            }
            if at + 1 < grid.len() {
                let mut values = p.values();
                values[axis] = grid[at + 1];
                out.push(PreprocParams::new(values));
            }
        }
        Ok(out)
    }

    /// Maps an arbitrary point onto the space by snapping every axis to the
    /// nearest grid value; equidistant ties take the lower value. Points
    /// already on the grid are returned unchanged.
    pub fn snap(&self, p: &PreprocParams) -> PreprocParams {
        let values = p.values();
        let mut snapped = [0u32; AXES];
        for i in 0..AXES {
            let grid = &self.axes[i];
            snapped[i] = match grid.binary_search(&values[i]) {
                Ok(pos) => grid[pos],
                Err(0) => grid[0],
                Err(pos) if pos == grid.len() => grid[grid.len() - 1],
                Err(pos) => {
                    let (lo, hi) = (grid[pos - 1], grid[pos]);
                    if values[i] - lo <= hi - values[i] {
                        lo
                    } else {
                        hi
                    }
                }
            };
        }
        PreprocParams::new(snapped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_key_joins_axis_values() {
        assert_eq!(default_start().canonical_key(), "8:7:4:100:16:8");
        let parsed = PreprocParams::from_key("8:7:4:100:16:8").unwrap();
        assert_eq!(parsed, default_start());
        assert!(PreprocParams::from_key("1:2:3").is_err());
    }

    #[test]
    fn built_in_space_sizes() {
        assert_eq!(ParamSpace::default_space().len(), 15_360);
        assert_eq!(ParamSpace::small_space().len(), 1_296);
    }

    #[test]
    fn enumerate_is_lexicographic_and_complete() {
        let space = ParamSpace::small_space();
        let all: Vec<PreprocParams> = space.enumerate().collect();
        assert_eq!(all.len(), 1_296);
        assert_eq!(all[0].values(), [8, 3, 2, 40, 4, 0]);
        assert_eq!(all[1].values(), [8, 3, 2, 40, 4, 8]);
        assert_eq!(all[2].values(), [8, 3, 2, 40, 8, 0]);
        assert_eq!(all.last().unwrap().values(), [13, 7, 4, 160, 16, 8]);

        let mut keys: Vec<String> = all.iter().map(|p| p.canonical_key()).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 1_296, "enumeration repeated a configuration");
    }

    #[test]
    fn perturb_moves_exactly_one_axis_one_step() {
        let space = ParamSpace::default_space();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let start = space.snap(&default_start());
        for _ in 0..1_000 {
            let moved = space.perturb(&start, &mut rng).unwrap();
            assert!(space.contains(&moved));
            let a = space.indices_of(&start).unwrap();
            let b = space.indices_of(&moved).unwrap();
            let steps: usize = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x.abs_diff(*y))
                .sum();
            assert_eq!(steps, 1, "{} -> {}", start.canonical_key(), moved.canonical_key());
        }
    }

    #[test]
    fn perturb_axis_choice_is_uniform() {
        // 10^4 recorded draws from a fixed seed: every axis lands within
        // 1/6 +- 0.02, and the chi-square statistic over the six counts
        // stays below the 0.999 quantile for five degrees of freedom.
        let space = ParamSpace::default_space();
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        let start = space.snap(&default_start());
        let a = space.indices_of(&start).unwrap();
        let mut counts = [0usize; AXES];
        let draws = 10_000;
        for _ in 0..draws {
            let moved = space.perturb(&start, &mut rng).unwrap();
            let b = space.indices_of(&moved).unwrap();
            let axis = (0..AXES).find(|&i| a[i] != b[i]).unwrap();
            counts[axis] += 1;
        }
        let expected = draws as f64 / AXES as f64;
        let mut chi2 = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - 1.0 / 6.0).abs() <= 0.02,
                "axis {} frequency {freq:.4} strayed from 1/6",
                AXIS_NAMES[i]
            );
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        assert!(chi2 < 20.515, "chi-square statistic {chi2:.2} too large");
    }

    #[test]
    fn perturb_at_edge_takes_only_legal_direction() {
        let space = ParamSpace::small_space();
        let corner: PreprocParams = space.enumerate().next().unwrap();
        let idx = space.indices_of(&corner).unwrap();
        assert_eq!(idx, [0; AXES]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let moved = space.perturb(&corner, &mut rng).unwrap();
            let b = space.indices_of(&moved).unwrap();
            assert_eq!(b.iter().sum::<usize>(), 1, "corner moves must step up");
        }
    }

    #[test]
    fn perturb_rejects_off_grid_start() {
        let space = ParamSpace::default_space();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(space.perturb(&default_start(), &mut rng).is_err());
    }

    #[test]
    fn snap_takes_nearest_value_and_lower_on_ties() {
        let space = ParamSpace::default_space();
        // 100 is equidistant between 80 and 120 on the tissue-area grid.
        let snapped = space.snap(&default_start());
        assert_eq!(snapped.values(), [8, 7, 4, 80, 16, 8]);
        assert_eq!(space.snap(&snapped), snapped);
        // Below-range and above-range values clamp to the grid ends.
        let wild = PreprocParams::new([0, 255, 99, 1, 999, 3]);
        assert_eq!(space.snap(&wild).values(), [4, 9, 6, 40, 32, 2]);
    }

    #[test]
    fn space_validation_names_offending_axis() {
        let mut axes = ParamSpace::default_space().axes;
        axes[1] = vec![3, 4];
        let err = ParamSpace::new(axes).unwrap_err().to_string();
        assert!(err.contains("blur_k"), "{err}");

        let mut axes = ParamSpace::default_space().axes;
        axes[0] = vec![300];
        let err = ParamSpace::new(axes).unwrap_err().to_string();
        assert!(err.contains("seg_thresh"), "{err}");

        let single: [Vec<u32>; AXES] =
            [vec![8], vec![3], vec![2], vec![40], vec![4], vec![0]];
        assert!(ParamSpace::new(single).is_err());
    }

    #[test]
    fn neighbors_match_one_step_moves() {
        let space = ParamSpace::small_space();
        let interior = PreprocParams::new([10, 5, 3, 80, 8, 0]);
        let n = space.neighbors(&interior).unwrap();
        // Five axes have two directions, max_holes at its edge has one.
        assert_eq!(n.len(), 11);
        let corner: PreprocParams = space.enumerate().next().unwrap();
        assert_eq!(space.neighbors(&corner).unwrap().len(), AXES);
    }
}
