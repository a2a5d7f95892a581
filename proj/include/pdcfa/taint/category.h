#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace pdcfa::taint {

enum class Category : uint8_t {
  Location,
  FileSystem,
  Sms,
  Phone,
  Voice,
  DeviceID,
  Network,
  ID,
  TimeOrDate,
  Display,
  Reflection,
  IPC,
  BrowserBookmark,
  SdCard,
  BrowserHistory,
  Thread,
  Picture,
  Contact,
  Sensor,
  Account,
  Media,
};

inline constexpr size_t kCategoryCount = 21;

const char* to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);
const std::array<Category, kCategoryCount>& all_categories();

} // namespace pdcfa::taint
