#pragma once

#include "skygrid/app/event_log.hpp"
#include "skygrid/server/snapshot.hpp"

namespace skygrid::app {

// StateSnapshot as a metrics-stream / console record:
//   {"type":"snapshot","schema_version":1,"t_ms":...,"drone":{...},...}
// Field names are documented in README.md and fixed by schema_version.
Json snapshot_to_json(const server::StateSnapshot& snapshot);

Json hello_message();
Json error_message(const std::string& message);

}  // namespace skygrid::app
