#include <exception>

#include "driftscope/error.hpp"

namespace driftscope {

void rethrow_tagged(const std::string& tag) {
  const std::string p = tag + ": ";
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(p + e.what());
  } catch (const DataError& e) {
    throw DataError(p + e.what());
  } catch (const SolverError& e) {
    throw SolverError(p + e.what());
  } catch (const DomainError& e) {
    throw DomainError(p + e.what());
  } catch (const OutOfBoundsError& e) {
    throw OutOfBoundsError(p + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(p + e.what());
  } catch (const SimulationError& e) {
    throw SimulationError(p + e.what());
  } catch (const std::exception& e) {
    throw Error(p + e.what());
  }
}

}  // namespace driftscope
