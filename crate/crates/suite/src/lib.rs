//! Hosts the `acceptance` test target; the criteria live in `moaccel_cli::acceptance`.
