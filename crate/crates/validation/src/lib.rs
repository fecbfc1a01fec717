//! Holds the `acceptance` test target; the crate itself is empty.
