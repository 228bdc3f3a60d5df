//! Core of the gesture annotation system: hand skeleton geometry and
//! rasterization, the landmark gesture classifier, debounce segmentation of
//! per-frame predictions into labeled intervals, and the socket wire format.

pub mod annotation;
pub mod classifier;
pub mod dataset;
pub mod gesture;
pub mod latency;
pub mod metrics;
pub mod model_file;
pub mod protocol;
pub mod raster;
pub mod skeleton;

pub use annotation::{AnnotationInterval, FramePrediction, LabelMapping, SegmenterConfig, Segmenter, SessionLog, SessionState};
pub use classifier::{LandmarkClassifier, TrainingConfig};
pub use gesture::{GestureClass, CLASS_ORDER};
pub use skeleton::{normalize, HandSkeleton, Handedness, Landmark, NormalizedFeatures};
