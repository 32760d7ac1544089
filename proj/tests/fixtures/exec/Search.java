public class Search {
    static int find(int[] xs, int key) {
        int found = -1;
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == key) {
                found = i;
                break;
            }
        }
        System.out.println("searched " + xs.length);
        return found;
    }

    public static void main(String[] args) {
        System.out.println(find(new int[] {4, 8, 15, 16, 23, 42}, 16));
        System.out.println(find(new int[] {1, 2}, 7));
    }
}
