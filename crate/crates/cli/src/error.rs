use std::fmt;

/// Pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Synth,
    Imagery,
    Split,
    Resample,
    Train,
    Model,
    Predict,
    Evaluate,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Imagery => "imagery",
            Stage::Split => "split",
            Stage::Resample => "resample",
            Stage::Train => "train",
            Stage::Model => "model",
            Stage::Predict => "predict",
            Stage::Evaluate => "evaluate",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct CliError {
    pub stage: Stage,
    #[source]
    pub source: broadcd_core::Error,
}

impl CliError {
    pub fn new(stage: Stage, source: broadcd_core::Error) -> Self {
        CliError { stage, source }
    }

    pub fn invalid(stage: Stage, message: impl Into<String>) -> Self {
        CliError::new(stage, broadcd_core::Error::InvalidParameter(message.into()))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Tags a core result with the stage it ran in.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> CliResult<T>;
}

impl<T> AtStage<T> for broadcd_core::Result<T> {
    fn at(self, stage: Stage) -> CliResult<T> {
        self.map_err(|e| CliError::new(stage, e))
    }
}
