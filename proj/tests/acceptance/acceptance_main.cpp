#include "acceptance.hpp"
int main() { return 0; }
