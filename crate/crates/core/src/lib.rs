pub mod config;
pub mod corrector;
pub mod eval;
pub mod geometry;
pub mod imaging;
pub mod layout;
pub mod lexicon;
pub mod ocr;
pub mod pipeline;
pub mod synth;
pub mod text;
