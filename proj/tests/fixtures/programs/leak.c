#include <stdlib.h>
int main(void) {
  void *p = malloc(19);
  p = 0;
  return 0;
}
