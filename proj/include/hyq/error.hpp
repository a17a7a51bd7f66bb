#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hyq {

// Error classes double as CLI exit codes: config=2, provider=3, sql=4, data=5.
enum class ErrorClass { Config = 2, Provider = 3, Sql = 4, Data = 5 };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, std::string message)
      : std::runtime_error(std::move(message)), cls_(cls) {}

  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

private:
  ErrorClass cls_;
};

struct ConfigError : Error {
  explicit ConfigError(std::string m) : Error(ErrorClass::Config, std::move(m)) {}
};
struct ProviderError : Error {
  explicit ProviderError(std::string m) : Error(ErrorClass::Provider, std::move(m)) {}
};
struct SqlError : Error {
  explicit SqlError(std::string m) : Error(ErrorClass::Sql, std::move(m)) {}
};
struct DataError : Error {
  explicit DataError(std::string m) : Error(ErrorClass::Data, std::move(m)) {}
};

} // namespace hyq
