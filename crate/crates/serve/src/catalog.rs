use facetopo_core::landmarks::Emotion;
use facetopo_core::metrics::DistanceKind;
use facetopo_core::persistence::Mode;
use facetopo_pipeline::Manifest;
use serde::Serialize;

/// What the cache holds, grouped subject → emotion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Catalog {
    pub subjects: Vec<SubjectEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubjectEntry {
    pub subject: String,
    pub emotions: Vec<EmotionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmotionEntry {
    pub emotion: Emotion,
    pub frames: usize,
    pub au: bool,
    pub diagrams: Vec<UnitEntry>,
    pub matrices: Vec<UnitEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitEntry {
    pub mode: Mode,
    pub subset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<DistanceKind>,
}

impl Catalog {
    /// `manifests` must be sorted by (subject, emotion); when one
    /// subject/emotion has several sources the first one wins, matching the
    /// lookup the endpoints use.
    pub fn from_manifests(manifests: &[Manifest]) -> Self {
        let mut subjects: Vec<SubjectEntry> = Vec::new();
        for m in manifests {
            if subjects.last().is_none_or(|s| s.subject != m.subject) {
                subjects.push(SubjectEntry {
                    subject: m.subject.clone(),
                    emotions: Vec::new(),
                });
            }
            let emotions = &mut subjects.last_mut().expect("pushed above").emotions;
            if emotions.last().is_some_and(|e| e.emotion == m.emotion) {
                log::warn!("{} / {}: ignoring duplicate sequence {}", m.subject, m.emotion, m.source);
                continue;
            }
            emotions.push(EmotionEntry {
                emotion: m.emotion,
                frames: m.frame_ids.len(),
                au: m.au.is_some(),
                diagrams: m
                    .diagrams
                    .iter()
                    .map(|d| UnitEntry {
                        mode: d.mode,
                        subset: d.subset.clone(),
                        kind: None,
                    })
                    .collect(),
                matrices: m
                    .matrices
                    .iter()
                    .map(|x| UnitEntry {
                        mode: x.mode,
                        subset: x.subset.clone(),
                        kind: Some(x.kind),
                    })
                    .collect(),
            });
        }
        Self { subjects }
    }
}
