#pragma once

#include <string>

namespace probekit::util {

// Random (version 4) UUID in canonical lowercase form.
std::string uuid4();

bool is_uuid(const std::string& s);

}  // namespace probekit::util
