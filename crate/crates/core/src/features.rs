//! Gesture feature modulation: offsets and multipliers that personality and
//! adaptation layer on top of a gesture's catalog geometry.

use serde::{Deserialize, Serialize};

use crate::catalog::GestureDef;
use crate::time::{round3, Millis};

/// Additive offsets (cm) and multiplicative factors applied to a gesture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub expanse_cm: f64,
    pub height_cm: f64,
    pub outwardness_cm: f64,
    pub speed: f64,
    pub scale: f64,
}

impl Modulation {
    pub const IDENTITY: Modulation = Modulation {
        expanse_cm: 0.0,
        height_cm: 0.0,
        outwardness_cm: 0.0,
        speed: 1.0,
        scale: 1.0,
    };

    /// Offsets add, factors multiply.
    pub fn then(&self, other: &Modulation) -> Modulation {
        Modulation {
            expanse_cm: self.expanse_cm + other.expanse_cm,
            height_cm: self.height_cm + other.height_cm,
            outwardness_cm: self.outwardness_cm + other.outwardness_cm,
            speed: self.speed * other.speed,
            scale: self.scale * other.scale,
        }
    }
}

impl Default for Modulation {
    fn default() -> Self {
        Modulation::IDENTITY
    }
}

/// The two modulation layers recorded on an annotation. Each layer is set,
/// never accumulated, so re-applying a transform is a no-op.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureModulation {
    pub personality: Modulation,
    pub adaptation: Modulation,
}

impl FeatureModulation {
    pub fn combined(&self) -> Modulation {
        self.personality.then(&self.adaptation)
    }

    pub fn is_identity(&self) -> bool {
        self.personality == Modulation::IDENTITY && self.adaptation == Modulation::IDENTITY
    }

    pub fn effective_duration(&self, annotated: Millis) -> Millis {
        let speed = self.personality.speed * self.adaptation.speed;
        annotated.div_f64(speed).max(Millis(1))
    }
}

/// Effective stroke features handed to the animation stage, quantized to
/// three decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Features {
    pub expanse_cm: f64,
    pub height_cm: f64,
    pub outwardness_cm: f64,
    pub speed: f64,
    pub scale: f64,
}

impl Features {
    pub fn effective(def: &GestureDef, modulation: &FeatureModulation) -> Features {
        let m = modulation.combined();
        Features {
            expanse_cm: round3(def.base_expanse + m.expanse_cm),
            height_cm: round3(def.base_height + m.height_cm),
            outwardness_cm: round3(def.base_outwardness + m.outwardness_cm),
            speed: round3(m.speed),
            scale: round3(m.scale),
        }
    }

    pub fn quantized(self) -> Features {
        Features {
            expanse_cm: round3(self.expanse_cm),
            height_cm: round3(self.height_cm),
            outwardness_cm: round3(self.outwardness_cm),
            speed: round3(self.speed),
            scale: round3(self.scale),
        }
    }
}
