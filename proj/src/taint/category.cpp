#include "pdcfa/taint/category.h"

namespace pdcfa::taint {

namespace {

constexpr std::array<const char*, kCategoryCount> kNames = {
    "Location",   "FileSystem",     "Sms",         "Phone",
    "Voice",      "DeviceID",       "Network",     "ID",
    "TimeOrDate", "Display",        "Reflection",  "IPC",
    "BrowserBookmark", "SdCard",    "BrowserHistory", "Thread",
    "Picture",    "Contact",        "Sensor",      "Account",
    "Media",
};

} // namespace

const char* to_string(Category c) {
  return kNames.at(static_cast<size_t>(c));
}

std::optional<Category> category_from_string(std::string_view s) {
  for (size_t i = 0; i < kNames.size(); ++i) {
    if (s == kNames[i]) {
      return static_cast<Category>(i);
    }
  }
  return std::nullopt;
}

const std::array<Category, kCategoryCount>& all_categories() {
  static const auto cats = [] {
    std::array<Category, kCategoryCount> out{};
    for (size_t i = 0; i < kCategoryCount; ++i) {
      out[i] = static_cast<Category>(i);
    }
    return out;
  }();
  return cats;
}

} // namespace pdcfa::taint
