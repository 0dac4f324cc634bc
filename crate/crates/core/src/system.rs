//! The two end-to-end designs compared in the experiments.
//!
//! * S-1: QoS-aware placement (ASLP-optimal q*) with the distance-threshold
//!   association radius D_{i,u}.
//! * S-2: cache-hit-maximizing placement, D2D from the nearest cacher within
//!   D_R regardless of link quality.

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::{overall_report, AnalyticOptions, AnalyticReport};
use crate::association::{association_thresholds, AssociationThresholds};
use crate::error::Result;
use crate::model::{ContentLibrary, DerivedConstants, NetworkConfig};
use crate::placement::{
    baseline_hitmax_caching_with_tol, optimize_caching, placement_distances, CachingPolicy, PlacementGeometry,
    DEFAULT_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    /// S-1
    Proposed,
    /// S-2
    HitMaxBaseline,
}

impl SystemKind {
    pub const ALL: [SystemKind; 2] = [SystemKind::Proposed, SystemKind::HitMaxBaseline];

    pub fn label(self) -> &'static str {
        match self {
            SystemKind::Proposed => "S-1",
            SystemKind::HitMaxBaseline => "S-2",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label().eq_ignore_ascii_case(label))
    }
}

impl core::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Placement and association radii of one system on one network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDesign {
    pub kind: SystemKind,
    pub constants: DerivedConstants,
    pub policy: CachingPolicy,
    /// Placement geometry (S-1 only).
    pub geometry: Option<PlacementGeometry>,
    /// γ-scaled association thresholds (S-1 only).
    pub thresholds: Option<AssociationThresholds>,
    /// Per-file D2D search radius: D_{i,u} for S-1, D_R for S-2.
    pub search_radii: Vec<f64>,
}

impl SystemDesign {
    pub fn new(kind: SystemKind, config: &NetworkConfig, library: &ContentLibrary) -> Result<Self> {
        config.validate()?;
        let constants = DerivedConstants::new(config, library)?;
        match kind {
            SystemKind::Proposed => {
                let geometry = placement_distances(&constants, config, library)?;
                let policy = optimize_caching(&geometry, library, config, DEFAULT_TOLERANCE)?;
                let thresholds = association_thresholds(&policy, &constants, library, config)?;
                let search_radii = thresholds.d_iu.clone();
                Ok(Self {
                    kind,
                    constants,
                    policy,
                    geometry: Some(geometry),
                    thresholds: Some(thresholds),
                    search_radii,
                })
            }
            SystemKind::HitMaxBaseline => {
                let policy = baseline_hitmax_caching_with_tol(library, config, DEFAULT_TOLERANCE)?;
                Ok(Self {
                    kind,
                    constants,
                    policy,
                    geometry: None,
                    thresholds: None,
                    search_radii: vec![config.d_r; library.len()],
                })
            }
        }
    }

    pub fn analytic(
        &self,
        config: &NetworkConfig,
        library: &ContentLibrary,
        options: &AnalyticOptions,
    ) -> Result<AnalyticReport> {
        overall_report(self.policy.q(), &self.search_radii, config, library, &self.constants, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for k in SystemKind::ALL {
            assert_eq!(SystemKind::from_label(k.label()), Some(k));
        }
        assert_eq!(SystemKind::from_label("s-2"), Some(SystemKind::HitMaxBaseline));
        assert_eq!(SystemKind::from_label("S-3"), None);
    }

    #[test]
    fn baseline_searches_discovery_radius() {
        let c = NetworkConfig::reference();
        let l = ContentLibrary::reference();
        let d = SystemDesign::new(SystemKind::HitMaxBaseline, &c, &l).unwrap();
        assert!(d.search_radii.iter().all(|&r| r == c.d_r));
        assert!(d.thresholds.is_none());
    }

    #[test]
    fn proposed_radii_within_discovery_distance() {
        let c = NetworkConfig::reference();
        let l = ContentLibrary::reference();
        let d = SystemDesign::new(SystemKind::Proposed, &c, &l).unwrap();
        assert!(d.search_radii.iter().all(|&r| r > 0.0 && r <= c.d_r));
        assert!((d.policy.occupancy() - l.m_d as f64).abs() < 1e-9);
    }
}
