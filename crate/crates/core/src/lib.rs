//! Compiler from gesture-annotated two-agent dialogs to timed gesture-phase
//! scripts, with personality and adaptation transforms, stimulus batch
//! construction and the statistics used to evaluate the stimuli.

pub mod align;
pub mod catalog;
pub mod dsl;
pub mod features;
pub mod time;
pub mod personality;
pub mod adaptation;
pub mod scheduler;
pub mod emitter;
pub mod config;
pub mod pipeline;
pub mod stimuli;
pub mod analysis;
