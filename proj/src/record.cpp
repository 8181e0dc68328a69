#include "vlcot/record.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "vlcot/error.hpp"
#include "vlcot/rng.hpp"

namespace vlcot {

std::string make_record_id(const std::string& source, std::size_t original_index) {
  std::string key = source;
  key.push_back(':');
  key += std::to_string(original_index);
  std::uint64_t h = fnv1a64(key);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return source + "-" + buf;
}

void sort_and_check_ids(Dataset& d) {
  std::sort(d.records.begin(), d.records.end(),
            [](const CurationRecord& a, const CurationRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < d.records.size(); ++i) {
    if (d.records[i].id == d.records[i - 1].id) {
      throw DataError("duplicate record id: " + d.records[i].id);
    }
  }
}

std::string now_iso8601() {
  if (std::getenv("VLCOT_FIXED_TIME") != nullptr) return "";
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vlcot
