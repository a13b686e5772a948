pub mod analyze;
pub mod plot;
pub mod shiftcmd;
pub mod study;
pub mod traincmd;

use crate::CliError;
use std::path::Path;
use topoweight::{Network, NormalisedNetwork};

pub fn load_network(path: &Path) -> Result<Network, CliError> {
    topoweight::io::load_network(path).map_err(CliError::from)
}

/// Fetches layer `k` of the normalised network, flagging an out-of-range
/// index as a usage error.
pub fn layer<'a>(
    net: &'a NormalisedNetwork,
    index: usize,
) -> Result<&'a topoweight::WeightMatrix, CliError> {
    net.layers().get(index).ok_or_else(|| {
        CliError::Usage(format!(
            "--layer {index} out of range; network has {} layers",
            net.layers().len()
        ))
    })
}
