#include "skygrid/app/event_log.hpp"

namespace skygrid::app {

void NdjsonEventLog::record(const Json& event) { out_ << event.dump() << '\n'; }

}  // namespace skygrid::app
