#include "ekisel/ensemble.hpp"

namespace ekisel {

Ensemble::Ensemble(Matrix particles) : particles_(std::move(particles)) {
  if (particles_.cols() < 2)
    throw InvalidInput("Ensemble requires at least two particles");
  if (particles_.rows() < 1)
    throw InvalidInput("Ensemble requires a positive state dimension");
  if (!particles_.allFinite())
    throw InvalidInput("Ensemble particles must be finite");
}

Vector Ensemble::mean() const { return particles_.rowwise().mean(); }

Matrix Ensemble::deviations() const {
  return particles_.colwise() - particles_.rowwise().mean().eval();
}

Matrix Ensemble::covariance() const {
  const Matrix dev = deviations();
  return (dev * dev.transpose()) / static_cast<double>(size());
}

}  // namespace ekisel
