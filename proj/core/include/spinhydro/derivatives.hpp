#pragma once

#include "spinhydro/field.hpp"

namespace spinhydro {

/// Spatial derivative discretization.
///   spectral: exact for band-limited periodic fields (Nyquist mode dropped
///             from first derivatives, kept in the Laplacian).
///   fd2:      second-order central differences with periodic wrap.
enum class Backend { spectral, fd2 };

const char* to_string(Backend backend);

VectorField gradient(const ScalarField& f, Backend backend = Backend::spectral);
ScalarField laplacian(const ScalarField& f, Backend backend = Backend::spectral);
ScalarField divergence(const VectorField& v, Backend backend = Backend::spectral);
VectorField curl(const VectorField& v, Backend backend = Backend::spectral);

ComplexVectorField gradient(const ComplexField& f, Backend backend = Backend::spectral);
ComplexField laplacian(const ComplexField& f, Backend backend = Backend::spectral);

}  // namespace spinhydro
