//! Command implementations behind the `cvcluster` binary.

pub fn placeholder() {}
