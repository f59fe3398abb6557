#pragma once

#include <filesystem>

#include "qsim/engine/engine.hpp"

namespace qsim::engine {

/// Loads every table in a data directory into the engine. Each table is a
/// sidecar schema file plus a data file:
///
///   <table>.schema   one "column_name TYPE" per line; optional
///                    "@partition_size N" directive; '#' starts a comment
///   <table>.jsonl    one JSON object (by column name) or array per line,
///                    physical types preserved as written
///   <table>.csv      no header; every cell loads as a string (empty =
///                    NULL), leaving conversion entirely to schema-on-read
///
/// Throws IO_ERROR for unreadable files or a missing data file.
void load_data_dir(ReferenceEngine& engine, const std::filesystem::path& dir);

} // namespace qsim::engine
