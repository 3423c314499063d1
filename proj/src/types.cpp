#include "chartbench/types.hpp"

#include "chartbench/errors.hpp"

namespace chartbench {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::dmap: return "dmap";
    case Method::isomap: return "isomap";
    case Method::umap: return "umap";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "dmap") return Method::dmap;
  if (name == "isomap") return Method::isomap;
  if (name == "umap") return Method::umap;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

}  // namespace chartbench
