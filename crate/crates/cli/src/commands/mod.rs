pub mod area;
pub mod cluster;
pub mod cues;
pub mod dprime;
pub mod frechet_time;
pub mod psychfit;
pub mod recognize_time;
pub mod skinfit;
pub mod stats;
pub mod synth;
