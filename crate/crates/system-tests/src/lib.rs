//! Holds the end-to-end acceptance run under `tests/`; it sits in its own
//! package so that it runs after every other suite in the workspace.
