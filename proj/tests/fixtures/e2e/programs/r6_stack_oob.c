#include <stdio.h>

int main(void) {
  volatile int idx = 8;
  int a[8];
  for (int i = 0; i < 8; i++) a[i] = i;
  a[idx] = 1;
  printf("%d\n", a[0]);
  return 0;
}
