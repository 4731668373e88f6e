#pragma once

#include <stdexcept>
#include <string>

namespace certlab
{

/*! \brief Coarse error categories.

  The CLI maps these onto exit codes (config = 2, resource = 3,
  verification = 4).
*/
enum class error_kind
{
  invalid_argument,
  invalid_trigger,
  arity_mismatch,
  structural,
  unsupported_depth,
  precision,
  capability,
  resource_budget,
  verification,
  invalid_deceiver,
  overlap,
  parse
};

inline const char* to_string( error_kind kind )
{
  switch ( kind )
  {
  case error_kind::invalid_argument: return "invalid_argument";
  case error_kind::invalid_trigger: return "invalid_trigger";
  case error_kind::arity_mismatch: return "arity_mismatch";
  case error_kind::structural: return "structural";
  case error_kind::unsupported_depth: return "unsupported_depth";
  case error_kind::precision: return "precision";
  case error_kind::capability: return "capability";
  case error_kind::resource_budget: return "resource_budget";
  case error_kind::verification: return "verification";
  case error_kind::invalid_deceiver: return "invalid_deceiver";
  case error_kind::overlap: return "overlap";
  case error_kind::parse: return "parse";
  }
  return "unknown";
}

class certlab_error : public std::runtime_error
{
public:
  certlab_error( error_kind kind, const std::string& what )
      : std::runtime_error( what ), kind_( kind )
  {
  }

  error_kind kind() const noexcept { return kind_; }

private:
  error_kind kind_;
};

/*! \brief Raised when an exact search exceeds its budget.

  `lower_bound` is the best lower bound proven before giving up (the largest
  sample size that was fully refuted, plus one).
*/
class budget_error : public certlab_error
{
public:
  budget_error( const std::string& what, std::size_t lower_bound )
      : certlab_error( error_kind::resource_budget, what ), lower_bound_( lower_bound )
  {
  }

  std::size_t lower_bound() const noexcept { return lower_bound_; }

private:
  std::size_t lower_bound_;
};

[[noreturn]] inline void fail( error_kind kind, const std::string& what )
{
  throw certlab_error( kind, what );
}

} // namespace certlab
