use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Table dimensions outside `A >= 1, B >= 1, 1 <= w <= 64`.
    InvalidDims { inputs: usize, neurons: usize, weight_bits: u32 },
    /// A weight does not fit signed `bits`-bit storage after rounding.
    Quantization { value: f64, bits: u32 },
    /// Structural violation found while decoding an indexed table.
    CorruptTable { row: usize, reason: &'static str },
    /// Input index outside the table.
    InputOutOfRange { input: usize, inputs: usize },
    /// Neuron index outside the table.
    NeuronOutOfRange { neuron: usize, neurons: usize },
    /// Weight mutation on a connection that does not exist.
    NoSuchConnection { input: usize, neuron: usize },
    /// Matrix and configuration disagree on dimensions.
    DimensionMismatch,
    /// Kernel, bounds, stimulus or run parameter out of range.
    InvalidParameter(&'static str),
    /// Routing destination names a core that does not exist.
    DanglingCore { core: usize },
    /// A spike list is not strictly increasing.
    UnsortedTrace { source: usize },
    /// `step` called with a tick not after the previous one.
    NonMonotonicTick { tick: u64, last: u64 },
    /// Stimulus event scheduled at or after the run duration.
    EventAfterEnd { tick: u64, duration: u64 },
    /// Two result sets do not cover the same synapses or sampling grid.
    Mismatch(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDims { inputs, neurons, weight_bits } => {
                write!(f, "invalid table dimensions {inputs}x{neurons} with {weight_bits}-bit weights")
            }
            Error::Quantization { value, bits } => {
                write!(f, "weight {value} does not fit signed {bits}-bit storage")
            }
            Error::CorruptTable { row, reason } => write!(f, "corrupt table at row {row}: {reason}"),
            Error::InputOutOfRange { input, inputs } => {
                write!(f, "input {input} out of range (core has {inputs} inputs)")
            }
            Error::NeuronOutOfRange { neuron, neurons } => {
                write!(f, "neuron {neuron} out of range (core has {neurons} neurons)")
            }
            Error::NoSuchConnection { input, neuron } => {
                write!(f, "no connection from input {input} to neuron {neuron}")
            }
            Error::DimensionMismatch => f.write_str("matrix dimensions differ from core dimensions"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::DanglingCore { core } => write!(f, "routing destination names missing core {core}"),
            Error::UnsortedTrace { source } => {
                write!(f, "spike list of source {source} is not strictly increasing")
            }
            Error::NonMonotonicTick { tick, last } => {
                write!(f, "tick {tick} does not follow previous tick {last}")
            }
            Error::EventAfterEnd { tick, duration } => {
                write!(f, "stimulus event at tick {tick} is past the run duration {duration}")
            }
            Error::Mismatch(what) => write!(f, "mismatched inputs: {what}"),
        }
    }
}

impl core::error::Error for Error {}
