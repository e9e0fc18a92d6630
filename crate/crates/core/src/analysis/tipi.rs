//! Ten-item personality inventory scoring.

use serde::Serialize;

use super::records::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    Extraversion,
    Agreeableness,
    Conscientiousness,
    EmotionalStability,
    Openness,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Conscientiousness,
        Trait::EmotionalStability,
        Trait::Openness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::EmotionalStability => "emotional_stability",
            Trait::Openness => "openness",
        }
    }

    /// 0-based item positions: (direct, reverse-scored).
    fn items(self) -> (usize, usize) {
        match self {
            Trait::Extraversion => (0, 5),
            Trait::Agreeableness => (6, 1),
            Trait::Conscientiousness => (2, 7),
            Trait::EmotionalStability => (8, 3),
            Trait::Openness => (4, 9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraitScores {
    pub extraversion: f64,
    pub agreeableness: f64,
    pub conscientiousness: f64,
    pub emotional_stability: f64,
    pub openness: f64,
}

impl TraitScores {
    pub fn get(&self, t: Trait) -> f64 {
        match t {
            Trait::Extraversion => self.extraversion,
            Trait::Agreeableness => self.agreeableness,
            Trait::Conscientiousness => self.conscientiousness,
            Trait::EmotionalStability => self.emotional_stability,
            Trait::Openness => self.openness,
        }
    }
}

pub fn tipi_score(items: &[u8; 10]) -> Result<TraitScores, DomainError> {
    for (i, &v) in items.iter().enumerate() {
        if !(1..=7).contains(&v) {
            return Err(DomainError::ItemRange {
                index: i + 1,
                value: v.to_string(),
            });
        }
    }
    let score = |t: Trait| {
        let (direct, reverse) = t.items();
        (items[direct] as f64 + (8 - items[reverse]) as f64) / 2.0
    };
    Ok(TraitScores {
        extraversion: score(Trait::Extraversion),
        agreeableness: score(Trait::Agreeableness),
        conscientiousness: score(Trait::Conscientiousness),
        emotional_stability: score(Trait::EmotionalStability),
        openness: score(Trait::Openness),
    })
}
