pub(crate) mod noop {}
