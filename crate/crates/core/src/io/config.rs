//! TOML application config.
//!
//! ```toml
//! [engine]
//! visibility_threshold = 0.5
//! decomposition_period = "auto"
//!
//! [stats]
//! test_retest_form = "consistency-average"
//! inter_rater_layout = "pooled"
//!
//! [mocap_markers]
//! "Skeleton:BackTop" = "C7"
//!
//! [[overrides]]
//! name = "Trunk Rotation"
//! orientation = "anterior-coronal"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mocap_csv::MarkerNameMap;
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::registry::{Registry, RegistryOverride};
use crate::stats::StatsOptions;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub engine: EngineConfig,
    pub stats: StatsOptions,
    /// Vendor marker label to mocap landmark name.
    pub mocap_markers: BTreeMap<String, String>,
    pub overrides: Vec<RegistryOverride>,
}

impl AppConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: AppConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.engine.validate()?;
        config.registry()?;
        config.marker_map()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn registry(&self) -> Result<Registry> {
        Registry::with_overrides(self.overrides.clone())
    }

    pub fn marker_map(&self) -> Result<MarkerNameMap> {
        MarkerNameMap::from_pairs(self.mocap_markers.iter().map(|(k, v)| (k.clone(), v.as_str())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DecompositionPeriod;
    use crate::registry::Orientation;
    use crate::stats::{IccForm, InterRaterLayout};

    #[test]
    fn parses_every_section() {
        let c = AppConfig::parse(
            r#"
            [engine]
            anomaly_sd = 2.5
            decomposition_period = 15

            [stats]
            inter_rater_form = "agreement-single"
            inter_rater_layout = "averaged"

            [mocap_markers]
            "Skel:BackTop" = "C7"

            [[overrides]]
            name = "Trunk Rotation"
            orientation = "lateral-sagittal"
            "#,
        )
        .unwrap();
        assert_eq!(c.engine.anomaly_sd, 2.5);
        assert_eq!(c.engine.decomposition_period, DecompositionPeriod::Fixed(15));
        assert_eq!(c.stats.inter_rater_form, IccForm::AgreementSingle);
        assert_eq!(c.stats.inter_rater_layout, InterRaterLayout::Averaged);
        assert_eq!(c.stats.test_retest_form, IccForm::ConsistencyAverage);
        let def = c.registry().unwrap().lookup("Trunk Rotation", None).unwrap();
        assert_eq!(def.orientation, Orientation::LateralSagittal);
        assert!(!c.marker_map().unwrap().is_identity());
    }

    #[test]
    fn empty_config_is_default_and_typos_fail() {
        assert_eq!(AppConfig::parse("").unwrap(), AppConfig::default());
        assert!(AppConfig::parse("[engine]\nanomaly_sds = 3.0\n").is_err());
        assert!(AppConfig::parse("[mocap_markers]\nX = \"NOPE\"\n").is_err());
        assert!(AppConfig::parse("[engine]\nanomaly_sd = -1.0\n").is_err());
    }
}
