//! Fine-tuning hyperparameters kept alongside a model for reproducibility.
//! Nothing in this workspace trains a model.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneSpec {
    pub epochs: u32,
    pub batch_size: u32,
    pub gradient_steps: u32,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub mixed_precision: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Default for FinetuneSpec {
    /// Best configuration found by the hyperparameter search for NLLB fine-tuning.
    fn default() -> Self {
        FinetuneSpec {
            epochs: 5,
            batch_size: 16,
            gradient_steps: 8,
            learning_rate: 3e-5,
            weight_decay: 0.1,
            mixed_precision: true,
            notes: None,
        }
    }
}

impl FinetuneSpec {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("epochs", self.epochs as f64),
            ("batch_size", self.batch_size as f64),
            ("gradient_steps", self.gradient_steps as f64),
            ("learning_rate", self.learning_rate),
            ("weight_decay", self.weight_decay),
        ];
        match positive.iter().find(|(_, v)| !(*v > 0.0)) {
            Some((name, v)) => Err(format!("{name} must be positive, got {v}")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let spec = FinetuneSpec::default();
        assert_eq!((spec.epochs, spec.batch_size, spec.gradient_steps), (5, 16, 8));
        assert_eq!(spec.learning_rate, 3e-5);
        assert_eq!(spec.weight_decay, 0.1);
        assert!(spec.mixed_precision);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn rejects_non_positive() {
        let spec = FinetuneSpec {
            learning_rate: 0.0,
            ..FinetuneSpec::default()
        };
        assert!(spec.validate().unwrap_err().contains("learning_rate"));
    }
}
