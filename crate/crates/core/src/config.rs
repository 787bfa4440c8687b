//! TOML run configuration.
//!
//! A run file has four sections — `[run]`, `[start]`, `[space]`,
//! `[cohort]` — and every field has a default, so the empty string parses
//! to the standard setup. The space is either a named preset or six
//! explicit per-axis grids; mixing the two is rejected rather than
//! guessed at.

use serde::{Deserialize, Serialize};

use crate::cohort::CohortConfig;
use crate::error::Error;
use crate::oracle::ScorerKind;
use crate::params::{default_start, ParamSpace, PreprocParams, AXES, AXIS_NAMES};
use crate::Result;

/// Parsed run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    /// Starting configuration; defaults to the shipped pipeline values.
    #[serde(default = "default_start")]
    pub start: PreprocParams,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub cohort: CohortConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u32,
    #[serde(default = "default_scorer")]
    pub scorer: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            strategy: default_strategy(),
            seed: default_seed(),
            budget: default_budget(),
            scorer: default_scorer(),
        }
    }
}

fn default_strategy() -> String {
    "bahop".into()
}

fn default_seed() -> u64 {
    17
}

fn default_budget() -> u32 {
    100
}

fn default_scorer() -> String {
    ScorerKind::PalePenalized.name().into()
}

/// Search-space selection: a named preset or six explicit grids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub preset: Option<String>,
    pub seg_thresh: Option<Vec<u32>>,
    pub blur_k: Option<Vec<u32>>,
    pub close_k: Option<Vec<u32>>,
    pub area_tissue_min: Option<Vec<u32>>,
    pub area_hole_min: Option<Vec<u32>>,
    pub max_holes: Option<Vec<u32>>,
}

impl SpaceSection {
    /// Resolves the section to a concrete space.
    pub fn build(&self) -> Result<ParamSpace> {
        let grids = [
            &self.seg_thresh,
            &self.blur_k,
            &self.close_k,
            &self.area_tissue_min,
            &self.area_hole_min,
            &self.max_holes,
        ];
        let explicit = grids.iter().filter(|g| g.is_some()).count();
        match (&self.preset, explicit) {
            (Some(name), 0) => ParamSpace::preset(name),
            (None, 0) => Ok(ParamSpace::default_space()),
            (None, n) if n == AXES => {
                let mut axes: [Vec<u32>; AXES] = Default::default();
                for (i, g) in grids.iter().enumerate() {
                    axes[i] = g.as_ref().expect("counted above").clone();
                }
                ParamSpace::new(axes)
            }
            (None, n) => {
                let missing: Vec<&str> = grids
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.is_none())
                    .map(|(i, _)| AXIS_NAMES[i])
                    .collect();
                Err(Error::Config(format!(
                    "space: {n} of {AXES} axes given; missing {}",
                    missing.join(", ")
                )))
            }
            (Some(_), _) => Err(Error::Config(
                "space: give either a preset or six explicit grids, not both".into(),
            )),
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Cross-field validation beyond what parsing can see.
    pub fn validate(&self) -> Result<()> {
        if self.run.budget == 0 {
            return Err(Error::Config("run.budget must be at least 1".into()));
        }
        crate::optimize::by_name(&self.run.strategy)?;
        ScorerKind::from_name(&self.run.scorer)?;
        self.space.build()?;
        self.cohort.validate()?;
        Ok(())
    }

    pub fn scorer(&self) -> ScorerKind {
        ScorerKind::from_name(&self.run.scorer).expect("validated at parse time")
    }

    pub fn space(&self) -> ParamSpace {
        self.space.build().expect("validated at parse time")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_standard_setup() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.run.strategy, "bahop");
        assert_eq!(c.run.seed, 17);
        assert_eq!(c.run.budget, 100);
        assert_eq!(c.start, default_start());
        assert_eq!(c.space(), ParamSpace::default_space());
        assert_eq!(c.cohort, CohortConfig::default());
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"
            [run]
            strategy = "anneal"
            seed = 99
            budget = 250
            scorer = "texture"

            [start]
            seg_thresh = 9
            blur_k = 5
            close_k = 3
            area_tissue_min = 80
            area_hole_min = 8
            max_holes = 2

            [space]
            preset = "small"

            [cohort]
            seed = 3
            slides = 16
            slide_px = 2048
            patch_px = 256
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.run.strategy, "anneal");
        assert_eq!(c.scorer(), ScorerKind::Texture);
        assert_eq!(c.start.values(), [9, 5, 3, 80, 8, 2]);
        assert_eq!(c.space().len(), 1_296);
        assert_eq!(c.cohort.slides, 16);
    }

    #[test]
    fn cohort_profile_is_selectable() {
        use crate::cohort::CohortProfile;
        let c = RunConfig::from_toml("[cohort]\nprofile = \"pale-lesion\"").unwrap();
        assert_eq!(c.cohort.profile, CohortProfile::PaleLesion);
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.cohort.profile, CohortProfile::Mixed);
        assert!(RunConfig::from_toml("[cohort]\nprofile = \"sepia\"").is_err());
    }

    #[test]
    fn explicit_grids_need_all_axes() {
        let text = r#"
            [space]
            seg_thresh = [8, 9, 10]
            blur_k = [3, 5]
        "#;
        let err = RunConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("close_k"), "{err}");
    }

    #[test]
    fn preset_and_grids_conflict() {
        let text = r#"
            [space]
            preset = "small"
            seg_thresh = [8]
        "#;
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn explicit_grids_build_a_space() {
        let text = r#"
            [space]
            seg_thresh = [8, 10]
            blur_k = [3, 5]
            close_k = [2]
            area_tissue_min = [40]
            area_hole_min = [8]
            max_holes = [0, 8]
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.space().len(), 8);
    }

    #[test]
    fn bad_names_are_rejected_with_context() {
        assert!(RunConfig::from_toml("[run]\nstrategy = \"gradient\"").is_err());
        assert!(RunConfig::from_toml("[run]\nscorer = \"softmax\"").is_err());
        assert!(RunConfig::from_toml("[run]\nbudget = 0").is_err());
        // Unknown fields are typos, not extensions.
        assert!(RunConfig::from_toml("[run]\nstrtegy = \"bahop\"").is_err());
    }

    #[test]
    fn cohort_validation_applies() {
        let text = "[cohort]\nslides = 2";
        assert!(RunConfig::from_toml(text).is_err());
    }
}
