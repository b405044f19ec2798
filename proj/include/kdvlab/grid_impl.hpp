#pragma once

namespace kdvlab {

template <class Symbol>
GridFunction apply_symbol(const GridFunction& g, Symbol&& symbol) {
  RealFft fft(g.size());
  std::vector<std::complex<double>> hat;
  fft.forward(g.values(), hat);
  const auto k = wavenumbers(g.size(), g.length());
  for (std::size_t j = 0; j < hat.size(); ++j) hat[j] *= symbol(k[j]);
  std::vector<double> out;
  fft.inverse(hat, out);
  return GridFunction(g.x_left(), g.x_right(), std::move(out));
}

}  // namespace kdvlab
