public class Totals {
    public static void main(String[] args) {
        int[] xs = {3, 1, 4, 1, 5, 9, 2, 6};
        int sum = 0;
        for (int x : xs) {
            sum += x;
        }
        int max = Integer.MIN_VALUE;
        for (int x : xs) {
            max = Math.max(max, x);
        }
        System.out.println("sum=" + sum);
        System.out.println("max=" + max);
    }
}
